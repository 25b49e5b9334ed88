//! First-order deformation relations of a quasi-polarized Dieudonne module
//! and the tangent Frobenius of an equicharacteristic display.
//!
//! Lifting the Hodge filtration `<Y1, Y2>` to `Y~_a = Y_a + t_a1 X1 + t_a2 X2`
//! is compatible with the pairing exactly when `<Y~1, Y~2> = 0`; that single
//! equation in `t11, t12, t21, t22` presents the local deformation ring.

use std::fmt;

use thiserror::Error;

use crate::dieudonne::{DieudonneError, DieudonneModule, RANK};
use crate::linalg::Matrix;
use crate::series::{SeriesError, SeriesRing, TruncatedSeries};
use crate::singularity::{classify_local_ring, LocalRingClass};
use crate::witt::{WittElement, WittRing};

/// Deformation variables, in order.
pub const T_NAMES: [&str; 4] = ["t11", "t12", "t21", "t22"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeformationError {
    #[error(transparent)]
    Module(#[from] DieudonneError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("malformed display: {0}")]
    Display(String),
}

/// Truncation degree used for relations unless one is given.
pub fn default_degree(p: u64) -> usize {
    6.max(p as usize + 1)
}

/// `A[[t11, t12, t21, t22]]` truncated at `degree`.
pub fn relation_ring(coeff: &WittRing, degree: usize) -> Result<SeriesRing, SeriesError> {
    SeriesRing::with_names(coeff, T_NAMES.map(String::from).to_vec(), degree)
}

/// Basis indices `Y1, Y2` spanning the Hodge filtration and the remaining
/// indices `X1, X2` in increasing order.
#[derive(Clone, PartialEq, Eq)]
pub struct HodgeFrame {
    module: DieudonneModule,
    y: [usize; 2],
    x: [usize; 2],
}

impl HodgeFrame {
    pub fn new(module: DieudonneModule, y: [usize; 2]) -> Result<Self, DeformationError> {
        if y[0] == y[1] || y.iter().any(|&i| i >= RANK) {
            return Err(DieudonneError::Frame(format!("indices {y:?} must be two distinct values below {RANK}")).into());
        }
        let (h, _) = module.hodge_filtration();
        let ring = module.ring().residue_field();
        let ey = Matrix::identity(&ring, RANK).select_columns(&y);
        if h.cols() != 2 || !h.same_column_span_mod(&ey, 1) {
            return Err(DieudonneError::Frame(format!(
                "e{} and e{} do not reduce to a basis of VM/pM",
                y[0] + 1,
                y[1] + 1
            ))
            .into());
        }
        let rest: Vec<usize> = (0..RANK).filter(|i| !y.contains(i)).collect();
        Ok(HodgeFrame { module, y, x: [rest[0], rest[1]] })
    }

    /// The first pair of basis vectors spanning the Hodge filtration.
    pub fn detect(module: DieudonneModule) -> Result<Self, DeformationError> {
        for a in 0..RANK {
            for b in a + 1..RANK {
                if let Ok(frame) = HodgeFrame::new(module.clone(), [a, b]) {
                    return Ok(frame);
                }
            }
        }
        Err(DieudonneError::Frame("VM/pM is not spanned by two basis vectors".into()).into())
    }

    pub fn module(&self) -> &DieudonneModule {
        &self.module
    }

    pub fn y_indices(&self) -> [usize; 2] {
        self.y
    }

    pub fn x_indices(&self) -> [usize; 2] {
        self.x
    }

    fn pair(&self, a: usize, b: usize) -> WittElement {
        self.module.pairing().get(a, b).clone()
    }

    /// `<Y~_a, Y~_b>` with `Y~_a = Y_a + sum_i t_ai X_i`, for `a, b` in `{0, 1}`.
    pub fn expand_pairing(&self, a: usize, b: usize, ring: &SeriesRing) -> Result<TruncatedSeries, DeformationError> {
        let t = |row: usize, col: usize| ring.var(2 * row + col);
        let (ya, yb) = (self.y[a], self.y[b]);
        let mut out = ring.constant(&self.pair(ya, yb));
        for i in 0..2 {
            out = &out + &t(b, i).scalar_mul(&self.pair(ya, self.x[i]));
            out = &out + &t(a, i).scalar_mul(&self.pair(self.x[i], yb));
            for j in 0..2 {
                out = &out + &(&t(a, i) * &t(b, j)).scalar_mul(&self.pair(self.x[i], self.x[j]));
            }
        }
        Ok(out)
    }

    /// The deformation relation `<Y~1, Y~2>`.
    pub fn deformation_equation(&self, degree: usize) -> Result<TruncatedSeries, DeformationError> {
        let ring = relation_ring(self.module.ring(), degree)?;
        self.expand_pairing(0, 1, &ring)
    }

    /// Local ring of the deformation space at the point.
    pub fn classify_point(&self, degree: usize) -> Result<LocalRingClass, DeformationError> {
        Ok(classify_local_ring(&self.deformation_equation(degree)?))
    }
}

impl fmt::Debug for HodgeFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HodgeFrame(Y = {:?}, X = {:?})", self.y, self.x)
    }
}

/// Relations `F e_i = e_{i+2} + sum_j T_ij e_j`, `V e_i = e_{i+2}` (i = 1, 2)
/// over `F_q[[t]]`, stored as the coordinates of `F e_i` and `V e_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquicharDisplay {
    ring: SeriesRing,
    f_images: [Vec<TruncatedSeries>; 2],
    v_images: [Vec<TruncatedSeries>; 2],
}

impl EquicharDisplay {
    /// Validates the shape of the given images.
    pub fn new(f_images: [Vec<TruncatedSeries>; 2], v_images: [Vec<TruncatedSeries>; 2]) -> Result<Self, DeformationError> {
        let ring = f_images[0]
            .first()
            .ok_or_else(|| DeformationError::Display("empty image".into()))?
            .ring()
            .clone();
        for img in f_images.iter().chain(&v_images) {
            if img.len() != RANK {
                return Err(DeformationError::Display(format!("images need {RANK} coordinates")));
            }
            if img.iter().any(|s| s.ring() != &ring) {
                return Err(DeformationError::Display("coordinates live in different rings".into()));
            }
        }
        for i in 0..2 {
            for k in 2..RANK {
                let expected = if k == i + 2 { ring.one() } else { ring.zero() };
                if f_images[i][k] != expected {
                    return Err(DeformationError::Display(format!("F e{} must have e{} coordinate {}", i + 1, k + 1, expected)));
                }
            }
            for k in 0..RANK {
                let expected = if k == i + 2 { ring.one() } else { ring.zero() };
                if v_images[i][k] != expected {
                    return Err(DeformationError::Display(format!("V e{} must equal e{}", i + 1, i + 3)));
                }
            }
        }
        Ok(EquicharDisplay { ring, f_images, v_images })
    }

    /// Display with `F e_i = e_{i+2} + T_i1 e1 + T_i2 e2`.
    pub fn from_t(ring: &SeriesRing, t: [[TruncatedSeries; 2]; 2]) -> Result<Self, DeformationError> {
        let image = |i: usize| -> Vec<TruncatedSeries> {
            let mut v = vec![t[i][0].clone(), t[i][1].clone(), ring.zero(), ring.zero()];
            v[i + 2] = ring.one();
            v
        };
        let vimage = |i: usize| -> Vec<TruncatedSeries> {
            let mut v = vec![ring.zero(); RANK];
            v[i + 2] = ring.one();
            v
        };
        Self::new([image(0), image(1)], [vimage(0), vimage(1)])
    }

    /// The universal display over `F_q[[t11, t12, t21, t22]]`, with `T_ij`
    /// reducing to `t_ij`.
    pub fn universal(field: &WittRing, degree: usize) -> Result<Self, DeformationError> {
        let ring = relation_ring(&field.residue_field(), degree)?;
        let t = |k: usize| ring.var(k);
        Self::from_t(&ring, [[t(0), t(1)], [t(2), t(3)]])
    }

    pub fn ring(&self) -> &SeriesRing {
        &self.ring
    }

    /// Frobenius on the tangent space `M~/VM~ = <e1, e2>`: row `i` holds the
    /// coordinates of `F e_i`.
    pub fn tangent_frobenius(&self) -> [[TruncatedSeries; 2]; 2] {
        let row = |i: usize| [self.f_images[i][0].clone(), self.f_images[i][1].clone()];
        [row(0), row(1)]
    }

    /// Determinant of the tangent Frobenius, which cuts out the
    /// non-ordinary locus.
    pub fn nonordinary_locus(&self) -> TruncatedSeries {
        let m = self.tangent_frobenius();
        &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
    }
}
