//! Quadratic forms `Q = sum_{i<=j} q_ij x_i x_j` over a Witt ring.

use std::fmt;

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::series::{SeriesError, SeriesRing, TruncatedSeries};
use crate::witt::{RingEmbedding, RingError, WittElement, WittRing};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuadFormError {
    #[error("split standardization needs odd residue characteristic")]
    UnsupportedCharacteristic,
    #[error("split standardization needs an even number of variables, got {0}")]
    OddRank(usize),
    #[error("quadratic form is degenerate")]
    Degenerate,
    #[error("series is not a homogeneous quadratic form")]
    NotQuadratic,
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    ring: WittRing,
    nvars: usize,
    /// `q_ij` for `i <= j`, row by row.
    upper: Vec<WittElement>,
}

fn upper_index(nvars: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < nvars);
    i * nvars - i * (i + 1) / 2 + j
}

impl QuadraticForm {
    pub fn zero(ring: &WittRing, nvars: usize) -> Self {
        QuadraticForm { ring: ring.clone(), nvars, upper: vec![ring.zero(); nvars * (nvars + 1) / 2] }
    }

    /// From the upper-triangular coefficient list `q_11, q_12, ..., q_nn`.
    pub fn new(ring: &WittRing, nvars: usize, upper: Vec<WittElement>) -> Result<Self, QuadFormError> {
        let expected = nvars * (nvars + 1) / 2;
        if upper.len() != expected {
            return Err(QuadFormError::WrongLength { expected, got: upper.len() });
        }
        if let Some(bad) = upper.iter().find(|x| x.ring() != ring) {
            return Err(RingError::Mismatch { left: ring.to_string(), right: bad.ring().to_string() }.into());
        }
        Ok(QuadraticForm { ring: ring.clone(), nvars, upper })
    }

    /// `x_1 x_2 + x_3 x_4 + ...`.
    pub fn split(ring: &WittRing, nvars: usize) -> Result<Self, QuadFormError> {
        if nvars % 2 == 1 {
            return Err(QuadFormError::OddRank(nvars));
        }
        let mut q = Self::zero(ring, nvars);
        for k in (0..nvars).step_by(2) {
            q.set(k, k + 1, ring.one());
        }
        Ok(q)
    }

    /// The form represented by a homogeneous degree-two series.
    pub fn from_series(f: &TruncatedSeries) -> Result<Self, QuadFormError> {
        if !f.is_homogeneous(2) {
            return Err(QuadFormError::NotQuadratic);
        }
        let ring = f.ring().coeff_ring();
        let nvars = f.ring().nvars();
        let mut q = Self::zero(ring, nvars);
        for (e, c) in f.terms() {
            let idx: Vec<usize> = e.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
            q.set(idx[0], idx[1], c);
        }
        Ok(q)
    }

    /// The degree-two part of a series, as a form.
    pub fn quadratic_part(f: &TruncatedSeries) -> Self {
        Self::from_series(&f.graded_part(2).expect("truncation degree is at least 3")).expect("homogeneous")
    }

    pub fn to_series(&self, ring: &SeriesRing) -> Result<TruncatedSeries, QuadFormError> {
        if ring.nvars() != self.nvars || ring.coeff_ring() != &self.ring {
            return Err(SeriesError::Mismatch { left: self.ring.to_string(), right: ring.to_string() }.into());
        }
        let mut out = ring.zero();
        for i in 0..self.nvars {
            for j in i..self.nvars {
                let mut e = vec![0u32; self.nvars];
                e[i] += 1;
                e[j] += 1;
                out = &out + &ring.term(&e, self.coeff(i, j))?;
            }
        }
        Ok(out)
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn upper(&self) -> &[WittElement] {
        &self.upper
    }

    /// `q_ij`, symmetric in its arguments.
    pub fn coeff(&self, i: usize, j: usize) -> &WittElement {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.upper[upper_index(self.nvars, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, c: WittElement) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.upper[upper_index(self.nvars, i, j)] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|x| x.is_zero())
    }

    /// Gram matrix of `B(x, y) = Q(x + y) - Q(x) - Q(y)`.
    pub fn gram(&self) -> Matrix {
        Matrix::from_fn(&self.ring, self.nvars, self.nvars, |i, j| {
            if i == j {
                self.coeff(i, i).scale_int(2)
            } else {
                self.coeff(i, j).clone()
            }
        })
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.gram().is_invertible()
    }

    pub fn evaluate(&self, x: &[WittElement]) -> WittElement {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let mut acc = self.ring.zero();
        for i in 0..self.nvars {
            for j in i..self.nvars {
                acc = acc + self.coeff(i, j) * &x[i] * &x[j];
            }
        }
        acc
    }

    /// `B(x, y)`.
    pub fn bilinear(&self, x: &[WittElement], y: &[WittElement]) -> WittElement {
        let g = self.gram();
        let gy = g.apply(y);
        x.iter().zip(&gy).fold(self.ring.zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn try_add(&self, other: &QuadraticForm) -> Result<QuadraticForm, QuadFormError> {
        if self.nvars != other.nvars {
            return Err(QuadFormError::WrongLength { expected: self.upper.len(), got: other.upper.len() });
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a.try_add(b)).collect::<Result<_, _>>()?;
        Ok(QuadraticForm { ring: self.ring.clone(), nvars: self.nvars, upper })
    }

    /// The form `y -> Q(C y)` for a square matrix `C`.
    pub fn compose_linear(&self, c: &Matrix) -> Result<QuadraticForm, QuadFormError> {
        if c.rows() != self.nvars {
            return Err(LinalgError::Shape(format!("{} variables, {} rows", self.nvars, c.rows())).into());
        }
        let k = c.cols();
        let mut out = Self::zero(&self.ring, k);
        for i in 0..self.nvars {
            for j in i..self.nvars {
                let q = self.coeff(i, j);
                if q.is_zero() {
                    continue;
                }
                for a in 0..k {
                    for b in a..k {
                        let mut t = c.get(i, a) * c.get(j, b);
                        if a != b {
                            t = t + c.get(i, b) * c.get(j, a);
                        }
                        let cur = out.coeff(a, b) + &(q * &t);
                        out.set(a, b, cur);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Image under a ring embedding.
    pub fn embed(&self, emb: &RingEmbedding) -> QuadraticForm {
        QuadraticForm {
            ring: emb.target.clone(),
            nvars: self.nvars,
            upper: self.upper.iter().map(|x| emb.apply(x)).collect(),
        }
    }

    /// A change of variables `C` with `Q(C y) = y_1 y_2 + y_3 y_4 + ...`
    /// exactly, over this ring or over `W_n(F_{q^2})` when a square root is
    /// missing.
    pub fn standardize_split(&self) -> Result<SplitStandardization, QuadFormError> {
        if self.ring.p() == 2 {
            return Err(QuadFormError::UnsupportedCharacteristic);
        }
        if self.nvars % 2 == 1 {
            return Err(QuadFormError::OddRank(self.nvars));
        }
        if !self.is_nondegenerate() {
            return Err(QuadFormError::Degenerate);
        }
        let identity = RingEmbedding::identity(&self.ring);
        if let Some(c) = self.monomial_pairing() {
            return Ok(SplitStandardization::finish(self, identity, c));
        }
        if let Some(c) = self.diagonal_pairing() {
            return Ok(SplitStandardization::finish(self, identity, c));
        }
        let emb = self.ring.quadratic_extension()?;
        let big = self.embed(&emb);
        let c = big.diagonal_pairing().expect("every residue is a square after a quadratic extension");
        Ok(SplitStandardization::finish(self, emb, c))
    }

    /// Fast path: every variable occurs in exactly one monomial, a cross term
    /// with unit coefficient. The answer is a scaled permutation.
    fn monomial_pairing(&self) -> Option<Matrix> {
        let n = self.nvars;
        let mut partner = vec![None; n];
        for i in 0..n {
            if !self.coeff(i, i).is_zero() {
                return None;
            }
            for j in i + 1..n {
                let c = self.coeff(i, j);
                if c.is_zero() {
                    continue;
                }
                if !c.is_unit() || partner[i].is_some() || partner[j].is_some() {
                    return None;
                }
                partner[i] = Some(j);
                partner[j] = Some(i);
            }
        }
        let mut c = Matrix::zeros(&self.ring, n, n);
        let mut col = 0;
        for i in 0..n {
            let j = partner[i]?;
            if j < i {
                continue;
            }
            c.set(i, col, self.ring.one());
            c.set(j, col + 1, self.coeff(i, j).inverse().ok()?);
            col += 2;
        }
        Some(c)
    }

    /// Orthogonalize with unit pivots, then turn consecutive pairs of
    /// diagonal entries into hyperbolic planes. Fails when a needed square
    /// root is missing from the residue field.
    fn diagonal_pairing(&self) -> Option<Matrix> {
        let n = self.nvars;
        let ring = &self.ring;
        let g = self.gram();
        let b = |x: &[WittElement], y: &[WittElement]| -> WittElement {
            let gy = g.apply(y);
            x.iter().zip(&gy).fold(ring.zero(), |acc, (a, c)| acc + a * c)
        };
        let unit_vec = |i: usize| -> Vec<WittElement> {
            (0..n).map(|k| if k == i { ring.one() } else { ring.zero() }).collect()
        };
        let mut rest: Vec<Vec<WittElement>> = (0..n).map(unit_vec).collect();
        let mut basis: Vec<(Vec<WittElement>, WittElement)> = Vec::with_capacity(n);
        while !rest.is_empty() {
            let pick = match (0..rest.len()).find(|&i| b(&rest[i], &rest[i]).is_unit()) {
                Some(i) => rest.remove(i),
                None => {
                    let (i, j) = (0..rest.len())
                        .flat_map(|i| (i + 1..rest.len()).map(move |j| (i, j)))
                        .find(|&(i, j)| b(&rest[i], &rest[j]).is_unit())?;
                    let v: Vec<WittElement> = rest[i].iter().zip(&rest[j]).map(|(x, y)| x + y).collect();
                    rest.remove(i);
                    v
                }
            };
            let bvv = b(&pick, &pick);
            let inv = bvv.inverse().ok()?;
            for w in rest.iter_mut() {
                let f = b(w, &pick) * &inv;
                for (wk, vk) in w.iter_mut().zip(&pick) {
                    *wk = &*wk - &(&f * vk);
                }
            }
            basis.push((pick, bvv));
        }
        // Q(y1 v1 + y2 v2) = d1 y1^2 + d2 y2^2 with d = b(v, v) / 2
        let half = ring.from_int(2).inverse().ok()?;
        let mut c = Matrix::zeros(ring, n, n);
        for (k, pair) in basis.chunks(2).enumerate() {
            let (v1, u1) = &pair[0];
            let (v2, u2) = &pair[1];
            let d1 = u1 * &half;
            let d2 = u2 * &half;
            let s = (-&d2 * d1.inverse().ok()?).sqrt()?;
            let scale = (d2.scale_int(4)).inverse().ok()?;
            let scale = -scale;
            for r in 0..n {
                let e = &s * &v1[r] + &v2[r];
                let f = (&s * &v1[r] - &v2[r]) * &scale;
                c.set(r, 2 * k, e);
                c.set(r, 2 * k + 1, f);
            }
        }
        Some(c)
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ring = SeriesRing::new(&self.ring, self.nvars.max(1), 3).map_err(|_| fmt::Error)?;
        let s = self.to_series(&ring).map_err(|_| fmt::Error)?;
        write!(f, "{s}")
    }
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadraticForm({self}) over {}", self.ring)
    }
}

/// Result of [`QuadraticForm::standardize_split`].
#[derive(Clone, Debug)]
pub struct SplitStandardization {
    /// Map from the original coefficient ring to the one used.
    pub embedding: RingEmbedding,
    /// Columns are the new basis vectors: `x = C y`.
    pub change_of_basis: Matrix,
    /// `Q(C y)`, the split form.
    pub form: QuadraticForm,
}

impl SplitStandardization {
    fn finish(q: &QuadraticForm, embedding: RingEmbedding, c: Matrix) -> Self {
        let form = q.embed(&embedding).compose_linear(&c).expect("square change of basis");
        debug_assert_eq!(form, QuadraticForm::split(&embedding.target, q.nvars).expect("even rank"));
        debug_assert!(c.is_invertible());
        SplitStandardization { embedding, change_of_basis: c, form }
    }

    /// Whether the residue field had to be enlarged.
    pub fn extended(&self) -> bool {
        !self.embedding.is_identity()
    }

    pub fn ring(&self) -> &WittRing {
        &self.embedding.target
    }
}
