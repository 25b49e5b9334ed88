//! JSON encodings of the algebraic objects.
//!
//! Rings are described by `{"p", "m", "n", "modulus"}` with the modulus
//! optional on input (the built-in one is used). A coefficient is an integer
//! when `m = 1` and a list of `m` integers (polynomial coefficients, constant
//! first) otherwise; negative integers are reduced mod `p^n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dieudonne::{DieudonneError, DieudonneModule};
use crate::field::FiniteField;
use crate::linalg::Matrix;
use crate::local_model::{IsotropicPlane, LocalModelError};
use crate::quadform::{QuadFormError, QuadraticForm};
use crate::series::{SeriesError, SeriesRing, TruncatedSeries};
use crate::witt::{balanced, RingError, WittElement, WittRing};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Module(#[from] DieudonneError),
    #[error(transparent)]
    QuadForm(#[from] QuadFormError),
    #[error(transparent)]
    LocalModel(#[from] LocalModelError),
}

fn invalid(msg: impl Into<String>) -> JsonError {
    JsonError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingJson {
    pub p: u64,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
}

impl RingJson {
    pub fn from_ring(ring: &WittRing) -> Self {
        RingJson {
            p: ring.p(),
            m: ring.m(),
            n: ring.n(),
            modulus: (ring.m() > 1).then(|| ring.field().modulus().to_vec()),
        }
    }

    pub fn to_ring(&self) -> Result<WittRing, JsonError> {
        let field = match &self.modulus {
            Some(modulus) => {
                let f = FiniteField::new(self.p, modulus.clone())?;
                if f.m() != self.m {
                    return Err(invalid(format!("modulus has degree {}, expected m = {}", f.m(), self.m)));
                }
                f
            }
            None => FiniteField::with_degree(self.p, self.m)?,
        };
        Ok(WittRing::new(field, self.n)?)
    }
}

/// A coefficient: an integer for prime fields, a polynomial otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Int(i64),
    Poly(Vec<i64>),
}

impl CoeffJson {
    /// Balanced representatives, so that `-1` prints as `-1`.
    pub fn from_element(x: &WittElement) -> Self {
        let pn = x.ring().characteristic();
        let c: Vec<i64> = x.coeffs().iter().map(|&v| balanced(v, pn)).collect();
        if c.len() == 1 {
            CoeffJson::Int(c[0])
        } else {
            CoeffJson::Poly(c)
        }
    }

    pub fn to_element(&self, ring: &WittRing) -> Result<WittElement, JsonError> {
        match self {
            CoeffJson::Int(k) => Ok(ring.from_int(*k)),
            CoeffJson::Poly(c) => Ok(ring.element(c)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub p: u64,
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    /// Polynomial coefficients mod `p^n`, constant term first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<i64>>,
    /// Teichmuller digits `a_0, ..., a_{n-1}` in `F_q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<Vec<CoeffJson>>,
}

impl ElementJson {
    pub fn from_element(x: &WittElement) -> Self {
        let desc = RingJson::from_ring(x.ring());
        ElementJson {
            p: desc.p,
            m: desc.m,
            n: desc.n,
            modulus: desc.modulus,
            coeffs: Some(x.coeffs().iter().map(|&c| c as i64).collect()),
            digits: Some(x.digits().iter().map(CoeffJson::from_element).collect()),
        }
    }

    pub fn ring_json(&self) -> RingJson {
        RingJson { p: self.p, m: self.m, n: self.n, modulus: self.modulus.clone() }
    }

    pub fn to_element(&self) -> Result<WittElement, JsonError> {
        self.to_element_in(&self.ring_json().to_ring()?)
    }

    /// Decodes against an already constructed ring, which must match.
    pub fn to_element_in(&self, ring: &WittRing) -> Result<WittElement, JsonError> {
        if (ring.p(), ring.m(), ring.n()) != (self.p, self.m, self.n) {
            return Err(invalid("element ring does not match"));
        }
        let from_coeffs = self.coeffs.as_ref().map(|c| ring.element(c)).transpose()?;
        let from_digits = match &self.digits {
            Some(d) => {
                let res = ring.residue_field();
                let digits = d.iter().map(|x| x.to_element(&res)).collect::<Result<Vec<_>, _>>()?;
                Some(ring.from_digits(&digits)?)
            }
            None => None,
        };
        match (from_coeffs, from_digits) {
            (Some(a), Some(b)) if a != b => Err(invalid("coeffs and digits describe different elements")),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(invalid("an element needs \"coeffs\" or \"digits\"")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coeff: CoeffJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub ring: RingJson,
    pub nvars: usize,
    /// Truncation degree: monomials of total degree `< degree` are kept.
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl SeriesJson {
    pub fn from_series(f: &TruncatedSeries) -> Self {
        let ring = f.ring();
        SeriesJson {
            ring: RingJson::from_ring(ring.coeff_ring()),
            nvars: ring.nvars(),
            degree: ring.degree(),
            vars: Some(ring.names().to_vec()),
            terms: Some(
                f.terms()
                    .iter()
                    .map(|(e, c)| TermJson { exp: e.clone(), coeff: CoeffJson::from_element(c) })
                    .collect(),
            ),
            text: Some(f.to_string()),
        }
    }

    /// The series ring described by the header fields.
    pub fn series_ring(&self) -> Result<SeriesRing, JsonError> {
        let coeff = self.ring.to_ring()?;
        let ring = match &self.vars {
            Some(names) => {
                if names.len() != self.nvars {
                    return Err(invalid(format!("{} names for {} variables", names.len(), self.nvars)));
                }
                SeriesRing::with_names(&coeff, names.clone(), self.degree)?
            }
            None => SeriesRing::new(&coeff, self.nvars, self.degree)?,
        };
        Ok(ring)
    }

    pub fn to_series(&self) -> Result<TruncatedSeries, JsonError> {
        let ring = self.series_ring()?;
        let from_terms = match &self.terms {
            Some(terms) => {
                let mut s = ring.zero();
                for t in terms {
                    let c = t.coeff.to_element(ring.coeff_ring())?;
                    s = &s + &ring.term(&t.exp, &c)?;
                }
                Some(s)
            }
            None => None,
        };
        let from_text = self.text.as_ref().map(|t| ring.parse(t)).transpose()?;
        match (from_terms, from_text) {
            (Some(a), Some(b)) if a != b => Err(invalid("\"terms\" and \"text\" describe different series")),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(invalid("a series needs \"terms\" or \"text\"")),
        }
    }
}

pub type MatrixJson = Vec<Vec<CoeffJson>>;

pub fn matrix_to_json(m: &Matrix) -> MatrixJson {
    m.to_rows().iter().map(|row| row.iter().map(CoeffJson::from_element).collect()).collect()
}

pub fn matrix_from_json(ring: &WittRing, rows: &MatrixJson) -> Result<Matrix, JsonError> {
    let rows = rows
        .iter()
        .map(|row| row.iter().map(|c| c.to_element(ring)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(ring, rows).map_err(|e| invalid(e.to_string()))
}

/// Operators as matrices whose columns are images of basis vectors, listed
/// row by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleJson {
    pub ring: RingJson,
    #[serde(rename = "F")]
    pub f: MatrixJson,
    #[serde(rename = "V")]
    pub v: MatrixJson,
    #[serde(rename = "J")]
    pub j: MatrixJson,
}

impl ModuleJson {
    pub fn from_module(m: &DieudonneModule) -> Self {
        ModuleJson {
            ring: RingJson::from_ring(m.ring()),
            f: matrix_to_json(m.f_matrix()),
            v: matrix_to_json(m.v_matrix()),
            j: matrix_to_json(m.pairing()),
        }
    }

    pub fn to_module(&self) -> Result<DieudonneModule, JsonError> {
        let ring = self.ring.to_ring()?;
        Ok(DieudonneModule::new(
            matrix_from_json(&ring, &self.f)?,
            matrix_from_json(&ring, &self.v)?,
            matrix_from_json(&ring, &self.j)?,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadFormJson {
    pub ring: RingJson,
    pub nvars: usize,
    /// `q_ij` for `i <= j`, row by row (graded order of the monomials).
    pub upper: Vec<CoeffJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl QuadFormJson {
    pub fn from_form(q: &QuadraticForm) -> Self {
        QuadFormJson {
            ring: RingJson::from_ring(q.ring()),
            nvars: q.nvars(),
            upper: q.upper().iter().map(CoeffJson::from_element).collect(),
            text: Some(q.to_string()),
        }
    }

    pub fn to_form(&self) -> Result<QuadraticForm, JsonError> {
        let ring = self.ring.to_ring()?;
        let upper = self.upper.iter().map(|c| c.to_element(&ring)).collect::<Result<Vec<_>, _>>()?;
        Ok(QuadraticForm::new(&ring, self.nvars, upper)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneJson {
    pub ring: RingJson,
    /// Reduced row echelon basis.
    pub rows: Vec<Vec<CoeffJson>>,
}

impl PlaneJson {
    pub fn from_plane(p: &IsotropicPlane) -> Self {
        PlaneJson {
            ring: RingJson::from_ring(p.field()),
            rows: p.rows().iter().map(|r| r.iter().map(CoeffJson::from_element).collect()).collect(),
        }
    }

    pub fn to_plane(&self) -> Result<IsotropicPlane, JsonError> {
        let ring = self.ring.to_ring()?;
        if self.rows.len() != 2 {
            return Err(invalid("a plane has two rows"));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.to_element(&ring)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IsotropicPlane::span(&rows[0], &rows[1])?)
    }
}
