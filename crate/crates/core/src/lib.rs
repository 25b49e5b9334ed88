//! Exact arithmetic for superspecial points of paramodular abelian surface
//! moduli: truncated Witt rings, power series over them, quadratic
//! singularities, rank-four Dieudonne modules with a quasi-polarization, and
//! the local model of the moduli space at its singular point.

use thiserror::Error;

pub mod deformation;
pub mod dieudonne;
pub mod field;
pub mod json;
pub mod linalg;
pub mod local_model;
pub mod quadform;
pub mod random;
pub mod series;
pub mod singularity;
pub mod witt;

pub use field::FiniteField;
pub use linalg::Matrix;
pub use series::{SeriesRing, TruncatedSeries};
pub use witt::{WittElement, WittRing};

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Ring(#[from] witt::RingError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Series(#[from] series::SeriesError),
    #[error(transparent)]
    QuadForm(#[from] quadform::QuadFormError),
    #[error(transparent)]
    Singularity(#[from] singularity::SingularityError),
    #[error(transparent)]
    Dieudonne(#[from] dieudonne::DieudonneError),
    #[error(transparent)]
    Deformation(#[from] deformation::DeformationError),
    #[error(transparent)]
    LocalModel(#[from] local_model::LocalModelError),
    #[error(transparent)]
    Json(#[from] json::JsonError),
}
