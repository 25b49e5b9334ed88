//! Special fiber of the paramodular local model in rank four.
//!
//! Points over `F_q` are the 2-planes of `F_q^4` isotropic for the reduction
//! of the alternating pairing with `psi(e1, e4) = p` and `psi(e2, e3) = 1`.
//! Modulo `p` the pairing has radical `<e1, e4>`, which is the unique
//! singular point.

use std::fmt;

use thiserror::Error;

use crate::deformation::relation_ring;
use crate::field::FiniteField;
use crate::linalg::Matrix;
use crate::series::{SeriesError, TruncatedSeries};
use crate::witt::{RingError, WittElement, WittRing};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalModelError {
    #[error("the chart is centred at <e1, e4>, not at {0}")]
    NotCenter(String),
    #[error("{0} is not a 2x4 matrix of rank 2 over a finite field")]
    NotPlane(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The pairing matrix `[[0, I'], [-I'^T, 0]]` with `I' = [[0, p], [1, 0]]`.
pub fn paramodular_pairing(ring: &WittRing) -> Matrix {
    let p = ring.uniformizer();
    let mut j = Matrix::zeros(ring, 4, 4);
    j.set(0, 3, p.clone());
    j.set(3, 0, -&p);
    j.set(1, 2, ring.one());
    j.set(2, 1, -ring.one());
    j
}

/// A 2-plane in `F_q^4`, stored as its reduced row echelon basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IsotropicPlane {
    rows: [Vec<WittElement>; 2],
}

impl IsotropicPlane {
    /// The plane spanned by two vectors over `F_q`, brought to echelon form.
    pub fn span(a: &[WittElement], b: &[WittElement]) -> Result<Self, LocalModelError> {
        let ring = a.first().map(|x| x.ring().clone()).ok_or_else(|| LocalModelError::NotPlane("empty".into()))?;
        if !ring.is_field() || a.len() != 4 || b.len() != 4 {
            return Err(LocalModelError::NotPlane(format!("{a:?}, {b:?}")));
        }
        let mut rows = vec![a.to_vec(), b.to_vec()];
        let mut r = 0;
        for c in 0..4 {
            let Some(k) = (r..2).find(|&k| !rows[k][c].is_zero()) else {
                continue;
            };
            rows.swap(r, k);
            let inv = rows[r][c].inverse()?;
            rows[r] = rows[r].iter().map(|x| x * &inv).collect();
            for i in 0..2 {
                if i != r && !rows[i][c].is_zero() {
                    let f = rows[i][c].clone();
                    let pivot = rows[r].clone();
                    rows[i] = rows[i].iter().zip(&pivot).map(|(x, y)| x - &(&f * y)).collect();
                }
            }
            r += 1;
            if r == 2 {
                break;
            }
        }
        if r < 2 {
            return Err(LocalModelError::NotPlane("vectors are dependent".into()));
        }
        let [r0, r1]: [Vec<WittElement>; 2] = rows.try_into().expect("two rows");
        Ok(IsotropicPlane { rows: [r0, r1] })
    }

    /// `<e1, e4>` over `F_q`.
    pub fn radical(field: &WittRing) -> Self {
        let e = |i: usize| -> Vec<WittElement> {
            (0..4).map(|k| if k == i { field.one() } else { field.zero() }).collect()
        };
        IsotropicPlane::span(&e(0), &e(3)).expect("independent")
    }

    pub fn rows(&self) -> &[Vec<WittElement>; 2] {
        &self.rows
    }

    pub fn field(&self) -> &WittRing {
        self.rows[0][0].ring()
    }

    /// Pivot columns of the echelon basis.
    pub fn pivots(&self) -> [usize; 2] {
        let first = |r: &Vec<WittElement>| r.iter().position(|x| !x.is_zero()).expect("nonzero row");
        [first(&self.rows[0]), first(&self.rows[1])]
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_rows(self.field(), self.rows.to_vec()).expect("uniform rows")
    }

    /// `psi(v, w)` modulo `p`.
    pub fn pairing(v: &[WittElement], w: &[WittElement]) -> WittElement {
        let j = paramodular_pairing(v[0].ring());
        let jw = j.apply(w);
        v.iter().zip(&jw).fold(v[0].ring().zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn is_isotropic(&self) -> bool {
        IsotropicPlane::pairing(&self.rows[0], &self.rows[1]).is_zero()
    }

    /// Dimension of the tangent space of the special fiber at this point:
    /// homomorphisms `phi: P -> F_q^4 / P` with
    /// `psi(phi v, w) + psi(v, phi w) = 0`.
    pub fn tangent_dimension(&self) -> usize {
        let field = self.field();
        let pivots = self.pivots();
        let comp: Vec<Vec<WittElement>> = (0..4)
            .filter(|c| !pivots.contains(c))
            .map(|c| (0..4).map(|k| if k == c { field.one() } else { field.zero() }).collect())
            .collect();
        let (v0, v1) = (&self.rows[0], &self.rows[1]);
        // phi(v_a) = sum_k m_ak w_k; the condition on (v0, v1) is linear in m,
        // the diagonal conditions vanish because psi is alternating
        let mut coeffs = Vec::with_capacity(4);
        for w in &comp {
            coeffs.push(IsotropicPlane::pairing(w, v1));
        }
        for w in &comp {
            coeffs.push(IsotropicPlane::pairing(v0, w));
        }
        let rank = usize::from(coeffs.iter().any(|c| !c.is_zero()));
        4 - rank
    }

    pub fn is_singular(&self) -> bool {
        self.tangent_dimension() == 4
    }
}

impl fmt::Display for IsotropicPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |r: &Vec<WittElement>| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        write!(f, "<({}), ({})>", row(&self.rows[0]), row(&self.rows[1]))
    }
}

impl fmt::Debug for IsotropicPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All 2-planes in `F_q^4` in echelon form, ordered by pivot columns and then
/// by the free entries.
pub fn all_planes(field: &WittRing) -> Vec<IsotropicPlane> {
    let elems: Vec<WittElement> = field.elements().collect();
    let q = elems.len();
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let free0: Vec<usize> = (i + 1..4).filter(|&c| c != j).collect();
            let free1: Vec<usize> = (j + 1..4).collect();
            let slots = free0.len() + free1.len();
            for idx in 0..q.pow(slots as u32) {
                let mut r0 = vec![field.zero(); 4];
                let mut r1 = vec![field.zero(); 4];
                r0[i] = field.one();
                r1[j] = field.one();
                let mut rest = idx;
                for &c in free0.iter() {
                    r0[c] = elems[rest % q].clone();
                    rest /= q;
                }
                for &c in free1.iter() {
                    r1[c] = elems[rest % q].clone();
                    rest /= q;
                }
                out.push(IsotropicPlane { rows: [r0, r1] });
            }
        }
    }
    out
}

/// The `F_q`-points of the special fiber.
pub fn enumerate_special_fiber(field: &WittRing) -> Vec<IsotropicPlane> {
    all_planes(&field.residue_field()).into_iter().filter(|p| p.is_isotropic()).collect()
}

/// Fiber points with a four-dimensional tangent space.
pub fn singular_points(field: &WittRing) -> Vec<IsotropicPlane> {
    enumerate_special_fiber(field).into_iter().filter(|p| p.is_singular()).collect()
}

/// `F_q` as a length-one Witt ring.
pub fn residue_field_of_order(q: u64) -> Result<WittRing, LocalModelError> {
    Ok(WittRing::new(FiniteField::with_order(q)?, 1)?)
}

/// The isotropy condition `psi(r1, r2)` on the chart of planes spanned by
/// the rows of `[[1, t11, t12, 0], [0, t21, t22, 1]]` around `<e1, e4>`.
pub fn chart_equation(ring: &WittRing, degree: usize, center: Option<&IsotropicPlane>) -> Result<TruncatedSeries, LocalModelError> {
    if let Some(c) = center {
        if c != &IsotropicPlane::radical(c.field()) {
            return Err(LocalModelError::NotCenter(c.to_string()));
        }
    }
    let sr = relation_ring(ring, degree)?;
    let t = |k: usize| sr.var(k);
    let r1 = [sr.one(), t(0), t(1), sr.zero()];
    let r2 = [sr.zero(), t(2), t(3), sr.one()];
    let j = paramodular_pairing(ring);
    let mut out = sr.zero();
    for a in 0..4 {
        for b in 0..4 {
            let c = j.get(a, b);
            if !c.is_zero() {
                out = &out + &(&r1[a] * &r2[b]).scalar_mul(c);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_is_alternating_with_two_dimensional_radical() {
        let r = WittRing::with_order(3, 2).unwrap();
        let j = paramodular_pairing(&r);
        assert_eq!(j.transpose(), -&j);
        assert_eq!(j.determinant().unwrap(), r.from_int(9));
        assert_eq!(j.rank_mod_p(), 2);
    }

    #[test]
    fn grassmannian_has_the_right_size() {
        for q in [2u64, 3, 4] {
            let f = residue_field_of_order(q).unwrap();
            assert_eq!(all_planes(&f).len() as u64, (q * q + 1) * (q * q + q + 1));
        }
    }

    #[test]
    fn radical_is_a_singular_fiber_point() {
        let f = residue_field_of_order(2).unwrap();
        let fiber = enumerate_special_fiber(&f);
        let z = IsotropicPlane::radical(&f);
        assert!(fiber.contains(&z));
        assert_eq!(z.tangent_dimension(), 4);
        assert_eq!(singular_points(&f), vec![z]);
    }

    #[test]
    fn plane_e1_e2_is_smooth() {
        let f = residue_field_of_order(2).unwrap();
        let e = |i: usize| -> Vec<WittElement> { (0..4).map(|k| f.from_int((k == i) as i64)).collect() };
        let plane = IsotropicPlane::span(&e(1), &e(0)).unwrap();
        assert!(plane.is_isotropic());
        assert_eq!(plane.tangent_dimension(), 3);
        assert!(!IsotropicPlane::span(&e(1), &e(2)).unwrap().is_isotropic());
    }

    #[test]
    fn chart_is_the_quadric() {
        let r = WittRing::with_order(2, 3).unwrap();
        let f = chart_equation(&r, 6, None).unwrap();
        assert_eq!(f, f.ring().parse("p + t11*t22 - t12*t21").unwrap());
        let field = r.residue_field();
        let off = IsotropicPlane::span(
            &[field.one(), field.one(), field.zero(), field.zero()],
            &[field.zero(), field.zero(), field.zero(), field.one()],
        )
        .unwrap();
        assert!(chart_equation(&r, 6, Some(&off)).is_err());
    }
}
