//! Rank-four quasi-polarized Dieudonne modules over `W_n(F_q)`.
//!
//! Operators are stored as matrices whose columns are the images of the
//! basis vectors. Frobenius acts by `F(c) = F_mat * sigma(c)` and
//! Verschiebung by `V(c) = V_mat * sigma^{-1}(c)`, so `FV = VF = p` become
//! the matrix identities `F_mat sigma(V_mat) = p` and
//! `V_mat sigma^{-1}(F_mat) = p`. The pairing is `<x, y> = x^T J y`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::witt::{RingError, WittElement, WittRing};

pub const RANK: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DieudonneError {
    #[error("this operation needs precision n >= {needed}, the ring has n = {got}")]
    PrecisionTooLow { needed: usize, got: usize },
    #[error("{name} must be a 4x4 matrix, got {rows}x{cols}")]
    Shape { name: &'static str, rows: usize, cols: usize },
    #[error("the pairing has elementary divisor valuations {0:?}; p times the dual lattice is not integral")]
    NotIntegralDual(Vec<usize>),
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("fixture needs {0}")]
    UnsupportedField(String),
    #[error("invalid Hodge frame: {0}")]
    Frame(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Named test modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// Superspecial, `F X_i = Y_i`, `F Y_i = -p X_i`, `<X1,Y1> = 1`, `<X2,Y2> = p`.
    Iia,
    /// Superspecial, `F X_i = Y_i`, `F Y_i = p X_i`, `<X1,X2> = 1`, `<Y1,Y2> = p`.
    Iib,
    /// Etale plus multiplicative: `F e1 = e1`, `F e2 = e2`, `F e3 = p e3`,
    /// `F e4 = p e4`, `<e1,e3> = 1`, `<e2,e4> = p`.
    Ordinary,
    /// Ordinary block on `(X1, Y1)` and a supersingular block on `(X2, Y2)`,
    /// with `<X1,Y1> = 1`, `<X2,Y2> = p`; a-number 1, p-rank 1.
    LagrangianGeneric,
    /// Supersingular with a-number 1: an index-`p` sublattice of a principal
    /// superspecial module, cut out by a generator outside `F_{p^2}`.
    Supersingular,
}

impl Fixture {
    pub const ALL: [Fixture; 5] =
        [Fixture::Iia, Fixture::Iib, Fixture::Ordinary, Fixture::LagrangianGeneric, Fixture::Supersingular];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Iia => "iia",
            Fixture::Iib => "iib",
            Fixture::Ordinary => "ordinary",
            Fixture::LagrangianGeneric => "lagrangian_generic",
            Fixture::Supersingular => "supersingular",
        }
    }
}

impl FromStr for Fixture {
    type Err = DieudonneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iia" => Ok(Fixture::Iia),
            "iib" => Ok(Fixture::Iib),
            "ordinary" => Ok(Fixture::Ordinary),
            "lagrangian_generic" | "lagrangian-generic" | "mixed" => Ok(Fixture::LagrangianGeneric),
            "supersingular" => Ok(Fixture::Supersingular),
            _ => Err(DieudonneError::UnknownFixture(s.to_string())),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of the kernel of the polarization at a superspecial point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelType {
    AlphaSquare,
    NonAlphaSquare,
    NotSuperspecial,
}

impl fmt::Display for KernelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KernelType::AlphaSquare => "AlphaSquare",
            KernelType::NonAlphaSquare => "NonAlphaSquare",
            KernelType::NotSuperspecial => "NotSuperspecial",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub fv_equals_p: bool,
    pub vf_equals_p: bool,
    pub alternating: bool,
    pub elementary_divisors: Vec<usize>,
    pub polarization_degree_p2: bool,
    pub pairing_compatible: bool,
    pub valid: bool,
}

#[derive(Clone, PartialEq, Eq)]
pub struct DieudonneModule {
    ring: WittRing,
    f: Matrix,
    v: Matrix,
    j: Matrix,
}

fn check_square(name: &'static str, m: &Matrix) -> Result<(), DieudonneError> {
    if m.rows() != RANK || m.cols() != RANK {
        return Err(DieudonneError::Shape { name, rows: m.rows(), cols: m.cols() });
    }
    Ok(())
}

impl DieudonneModule {
    /// Assembles a module; only shapes and rings are checked here, see
    /// [`Self::validate`] for the structural identities.
    pub fn new(f: Matrix, v: Matrix, j: Matrix) -> Result<Self, DieudonneError> {
        check_square("F", &f)?;
        check_square("V", &v)?;
        check_square("J", &j)?;
        let ring = f.ring().clone();
        for m in [&v, &j] {
            if m.ring() != &ring {
                return Err(RingError::Mismatch { left: ring.to_string(), right: m.ring().to_string() }.into());
            }
        }
        Ok(DieudonneModule { ring, f, v, j })
    }

    pub fn fixture(which: Fixture, ring: &WittRing) -> Result<Self, DieudonneError> {
        if ring.n() < 2 {
            return Err(DieudonneError::PrecisionTooLow { needed: 2, got: ring.n() });
        }
        let p = ring.p() as i64;
        let ints = |rows: [[i64; 4]; 4]| Matrix::from_ints(ring, &rows.map(|r| r.to_vec())).transpose();
        // The arrays below list columns, i.e. the images of e1..e4.
        let module = match which {
            Fixture::Iia => DieudonneModule::new(
                ints([[0, 0, 1, 0], [0, 0, 0, 1], [-p, 0, 0, 0], [0, -p, 0, 0]]),
                ints([[0, 0, -1, 0], [0, 0, 0, -1], [p, 0, 0, 0], [0, p, 0, 0]]),
                alternating(ring, &[(0, 2, ring.one()), (1, 3, ring.uniformizer())]),
            )?,
            Fixture::Iib => {
                let fv = ints([[0, 0, 1, 0], [0, 0, 0, 1], [p, 0, 0, 0], [0, p, 0, 0]]);
                DieudonneModule::new(
                    fv.clone(),
                    fv,
                    alternating(ring, &[(0, 1, ring.one()), (2, 3, ring.uniformizer())]),
                )?
            }
            Fixture::Ordinary => DieudonneModule::new(
                ints([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, p, 0], [0, 0, 0, p]]),
                ints([[p, 0, 0, 0], [0, p, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
                alternating(ring, &[(0, 2, ring.one()), (1, 3, ring.uniformizer())]),
            )?,
            Fixture::LagrangianGeneric => DieudonneModule::new(
                ints([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, p, 0], [0, -p, 0, 0]]),
                ints([[p, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0], [0, p, 0, 0]]),
                alternating(ring, &[(0, 2, ring.one()), (1, 3, ring.uniformizer())]),
            )?,
            Fixture::Supersingular => {
                if ring.m() < 3 {
                    return Err(DieudonneError::UnsupportedField(
                        "a residue field F_{p^m} with m >= 3 (a generator outside F_{p^2})".into(),
                    ));
                }
                let lam = ring.generator();
                let z = ring.zero();
                let one = ring.one();
                let pe = ring.uniformizer();
                let cols = |c: [[WittElement; 4]; 4]| {
                    Matrix::from_fn(ring, 4, 4, |i, j| c[j][i].clone())
                };
                let f = cols([
                    [z.clone(), z.clone(), one.clone(), lam.frobenius()],
                    [z.clone(), z.clone(), z.clone(), pe.clone()],
                    [-&pe, lam.clone(), z.clone(), z.clone()],
                    [z.clone(), -&one, z.clone(), z.clone()],
                ]);
                let v = cols([
                    [z.clone(), z.clone(), -&one, -lam.frobenius_inverse()],
                    [z.clone(), z.clone(), z.clone(), -&pe],
                    [pe.clone(), -&lam, z.clone(), z.clone()],
                    [z.clone(), one.clone(), z.clone(), z.clone()],
                ]);
                let j = alternating(ring, &[(0, 2, one.clone()), (0, 3, lam.clone()), (1, 3, pe.clone())]);
                DieudonneModule::new(f, v, j)?
            }
        };
        Ok(module)
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn f_matrix(&self) -> &Matrix {
        &self.f
    }

    pub fn v_matrix(&self) -> &Matrix {
        &self.v
    }

    pub fn pairing(&self) -> &Matrix {
        &self.j
    }

    /// `F` applied to each column of `c`.
    pub fn apply_f(&self, c: &Matrix) -> Matrix {
        &self.f * &c.frobenius()
    }

    /// `V` applied to each column of `c`.
    pub fn apply_v(&self, c: &Matrix) -> Matrix {
        &self.v * &c.frobenius_inverse()
    }

    /// `<x, y>`.
    pub fn pair(&self, x: &[WittElement], y: &[WittElement]) -> WittElement {
        let jy = self.j.apply(y);
        x.iter().zip(&jy).fold(self.ring.zero(), |acc, (a, b)| acc + a * b)
    }

    /// Gram matrix `B^T J B` of the columns of `b`.
    pub fn gram_of(&self, b: &Matrix) -> Matrix {
        &(&b.transpose() * &self.j) * b
    }

    pub fn validate(&self) -> ValidationReport {
        let p_id = Matrix::identity(&self.ring, RANK).scale_int(self.ring.p());
        let fv_equals_p = &self.f * &self.v.frobenius() == p_id;
        let vf_equals_p = &self.v * &self.f.frobenius_inverse() == p_id;
        let alternating = self.j.transpose() == -&self.j && (0..RANK).all(|i| self.j.get(i, i).is_zero());
        let elementary_divisors = self.j.elementary_divisor_valuations();
        let polarization_degree_p2 = elementary_divisors == [0, 0, 1, 1];
        // <F e_i, e_j> = sigma <e_i, V e_j>
        let pairing_compatible = &self.f.transpose() * &self.j == (&self.j * &self.v).frobenius();
        let valid = fv_equals_p && vf_equals_p && alternating && polarization_degree_p2 && pairing_compatible;
        ValidationReport {
            fv_equals_p,
            vf_equals_p,
            alternating,
            elementary_divisors,
            polarization_degree_p2,
            pairing_compatible,
            valid,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().valid
    }

    /// `dim M / (F, V) M`.
    pub fn a_number(&self) -> usize {
        let fv = self.f.hstack(&self.v).expect("same row count");
        RANK - fv.rank_mod_p()
    }

    /// Rank of the stable image of the semilinear map `F` on `M / pM`.
    pub fn p_rank(&self) -> usize {
        let fbar = self.f.residue();
        // image of F^k is spanned by the columns of F sigma(F) ... sigma^{k-1}(F)
        let mut power = fbar.clone();
        for _ in 1..RANK {
            power = &fbar * &power.frobenius();
        }
        power.rank_mod_p()
    }

    /// Basis of `p M^t` inside `M`, as the columns of `(p J^{-1})^T`. The
    /// columns `b_i` satisfy `<b_i, e_j> = p delta_ij`; they are determined
    /// modulo `p^(n-1)`.
    pub fn dual_lattice(&self) -> Result<Matrix, DieudonneError> {
        if self.ring.n() < 2 {
            return Err(DieudonneError::PrecisionTooLow { needed: 2, got: self.ring.n() });
        }
        let s = self.j.smith();
        if s.valuations.iter().any(|&v| v > 1) {
            return Err(DieudonneError::NotIntegralDual(s.valuations));
        }
        // U J V = D, so p J^{-1} = V diag(p^(1 - v_i)) U
        let scale = Matrix::from_fn(&self.ring, RANK, RANK, |i, j| {
            if i != j {
                self.ring.zero()
            } else if s.valuations[i] == 0 {
                self.ring.uniformizer()
            } else {
                self.ring.one()
            }
        });
        Ok((&(&s.v * &scale) * &s.u).transpose())
    }

    /// `AlphaSquare` when `F M^t` and `V M^t` lie in `M`, for modules of
    /// a-number 2.
    pub fn kernel_type(&self) -> Result<KernelType, DieudonneError> {
        if self.ring.n() < 2 {
            return Err(DieudonneError::PrecisionTooLow { needed: 2, got: self.ring.n() });
        }
        if self.a_number() != 2 {
            return Ok(KernelType::NotSuperspecial);
        }
        let b = self.dual_lattice()?;
        // F(p M^t) in p M iff every entry is divisible by p
        let inside = self.apply_f(&b).valuation() >= 1 && self.apply_v(&b).valuation() >= 1;
        Ok(if inside { KernelType::AlphaSquare } else { KernelType::NonAlphaSquare })
    }

    /// The module in the basis given by the columns of `g`.
    pub fn base_change(&self, g: &Matrix) -> Result<DieudonneModule, DieudonneError> {
        check_square("change of basis", g)?;
        let ginv = g.inverse()?;
        let f = &(&ginv * &self.f) * &g.frobenius();
        let v = &(&ginv * &self.v) * &g.frobenius_inverse();
        let j = self.gram_of(g);
        DieudonneModule::new(f, v, j)
    }

    /// Columns spanning the Hodge filtration `VM / pM` over `F_q`, in
    /// reduced echelon form, with their pivot rows.
    pub fn hodge_filtration(&self) -> (Matrix, Vec<usize>) {
        column_echelon(&self.v.residue())
    }

    /// Searches for a co-torsion-free isotropic rank-two `L` inside `VM` and
    /// completes it to a basis with pairing `<X1,Y1> = 1`, `<X2,Y2> = p`.
    /// A found witness is a proof; exhaustion only says that no witness
    /// exists at this precision.
    pub fn lagrangian_witness_search(&self, budget: u64) -> Result<LagrangianSearch, DieudonneError> {
        let n = self.ring.n();
        if n < 2 {
            return Err(DieudonneError::PrecisionTooLow { needed: 2, got: n });
        }
        let (h, pivots) = self.hodge_filtration();
        if h.cols() != 2 {
            return Ok(LagrangianSearch::Exhausted { precision: n, nodes: 0 });
        }
        // Every lift of the Hodge filtration lies in VM because pM does.
        // Lifts with basis v_i + sum_j alpha_ij e_{c_j}, alpha in pW, are
        // all distinct, where c_1, c_2 are the non-pivot rows.
        let lifts = h.map_to(&self.ring, |x| self.ring.raw(x.coeffs()));
        let comp: Vec<usize> = (0..RANK).filter(|i| !pivots.contains(i)).collect();
        let e = |i: usize| -> Vec<WittElement> {
            (0..RANK).map(|k| if k == i { self.ring.one() } else { self.ring.zero() }).collect()
        };
        let v1 = lifts.col(0);
        let v2 = lifts.col(1);
        let ec: Vec<Vec<WittElement>> = comp.iter().map(|&c| e(c)).collect();
        let relation = Relation {
            constant: self.pair(&v1, &v2),
            // coefficient of alpha_2j and alpha_1i
            lin2: ec.iter().map(|x| self.pair(&v1, x)).collect(),
            lin1: ec.iter().map(|x| self.pair(x, &v2)).collect(),
            quad: ec.iter().map(|x| ec.iter().map(|y| self.pair(x, y)).collect()).collect(),
        };
        let mut search = DigitSearch {
            ring: &self.ring,
            residue: self.ring.residue_field().elements().collect(),
            relation: &relation,
            nodes: 0,
            budget,
        };
        let start = vec![self.ring.zero(); 4];
        if !relation.eval(&start).in_ideal(1) {
            return Ok(LagrangianSearch::Exhausted { precision: n, nodes: 1 });
        }
        let Some(alpha) = search.extend(start, 1)? else {
            return Ok(if search.nodes > search.budget {
                LagrangianSearch::BudgetExceeded { nodes: search.nodes }
            } else {
                LagrangianSearch::Exhausted { precision: n, nodes: search.nodes }
            });
        };
        let l = Matrix::from_fn(&self.ring, RANK, 2, |r, j| {
            let mut x = lifts.get(r, j).clone();
            for (k, &c) in comp.iter().enumerate() {
                if r == c {
                    x = x + &alpha[2 * j + k];
                }
            }
            x
        });
        let basis = self.complete_lagrangian(&l, &comp)?;
        let witness = LagrangianWitness { basis, nodes: search.nodes };
        debug_assert!(self.verify_witness(&witness.basis));
        Ok(LagrangianSearch::Found(witness))
    }

    /// Given isotropic `L` (columns) and complement indices, builds
    /// `X1, X2, Y1, Y2` with the standard pairing.
    fn complete_lagrangian(&self, l: &Matrix, comp: &[usize]) -> Result<Matrix, DieudonneError> {
        let e = Matrix::identity(&self.ring, RANK).select_columns(comp);
        let n_mat = &(&e.transpose() * &self.j) * l;
        let s = n_mat.smith();
        if s.valuations != [0, 1] {
            return Err(DieudonneError::Frame(format!("pairing against L has divisors {:?}", s.valuations)));
        }
        let x = &e * &s.u.transpose();
        let y = l * &s.v;
        let alpha = self.pair(&x.col(0), &x.col(1));
        let x2: Vec<WittElement> = x.col(1).iter().zip(y.col(0)).map(|(a, b)| a - &(&alpha * &b)).collect();
        let cols = [x.col(0), x2, y.col(0), y.col(1)];
        Ok(Matrix::from_fn(&self.ring, RANK, RANK, |i, j| cols[j][i].clone()))
    }

    /// Checks that the columns `X1, X2, Y1, Y2` form a basis with `Y_i` in
    /// `VM` and pairing `<X1,Y1> = 1`, `<X2,Y2> = p`, all others zero.
    pub fn verify_witness(&self, basis: &Matrix) -> bool {
        if basis.rows() != RANK || basis.cols() != RANK || !basis.is_invertible() {
            return false;
        }
        let y = basis.select_columns(&[2, 3]);
        if !self.v.spans_columns(&y) {
            return false;
        }
        self.gram_of(basis) == standard_lagrangian_pairing(&self.ring)
    }
}

/// The pairing `<X1,Y1> = 1`, `<X2,Y2> = p` in the basis `X1, X2, Y1, Y2`.
pub fn standard_lagrangian_pairing(ring: &WittRing) -> Matrix {
    alternating(ring, &[(0, 2, ring.one()), (1, 3, ring.uniformizer())])
}

/// Alternating matrix with `J[i][j] = c`, `J[j][i] = -c` for each entry.
pub fn alternating(ring: &WittRing, entries: &[(usize, usize, WittElement)]) -> Matrix {
    let mut j = Matrix::zeros(ring, RANK, RANK);
    for (a, b, c) in entries {
        j.set(*a, *b, c.clone());
        j.set(*b, *a, -c);
    }
    j
}

/// Reduced column echelon form over a field: returns a basis of the column
/// space with identity rows at the pivots, and the pivot rows.
fn column_echelon(m: &Matrix) -> (Matrix, Vec<usize>) {
    let t = m.transpose();
    let ring = m.ring().clone();
    let mut rows: Vec<Vec<WittElement>> = t.to_rows();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..m.rows() {
        let Some(r) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, r);
        let inv = rows[rank][c].inverse().expect("field element");
        rows[rank] = rows[rank].iter().map(|x| x * &inv).collect();
        for i in 0..rows.len() {
            if i != rank && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot_row = rows[rank].clone();
                rows[i] = rows[i].iter().zip(&pivot_row).map(|(a, b)| a - &(&f * b)).collect();
            }
        }
        pivots.push(c);
        rank += 1;
    }
    rows.truncate(rank);
    let basis = Matrix::from_rows(&ring, rows).expect("uniform rows");
    let basis = if rank == 0 { Matrix::zeros(&ring, m.rows(), 0) } else { basis.transpose() };
    (basis, pivots)
}

/// `<l1, l2>` as a polynomial in `alpha = (a11, a12, a21, a22)`.
struct Relation {
    constant: WittElement,
    lin1: Vec<WittElement>,
    lin2: Vec<WittElement>,
    quad: Vec<Vec<WittElement>>,
}

impl Relation {
    fn eval(&self, alpha: &[WittElement]) -> WittElement {
        let mut acc = self.constant.clone();
        for k in 0..2 {
            acc = acc + &self.lin1[k] * &alpha[k] + &self.lin2[k] * &alpha[2 + k];
            for l in 0..2 {
                acc = acc + &self.quad[k][l] * &alpha[k] * &alpha[2 + l];
            }
        }
        acc
    }
}

struct DigitSearch<'a> {
    ring: &'a WittRing,
    residue: Vec<WittElement>,
    relation: &'a Relation,
    nodes: u64,
    budget: u64,
}

impl DigitSearch<'_> {
    /// Chooses Teichmuller digit `k` of all four entries so that the
    /// relation vanishes mod `p^(k+1)`, then recurses.
    fn extend(&mut self, alpha: Vec<WittElement>, k: usize) -> Result<Option<Vec<WittElement>>, DieudonneError> {
        let n = self.ring.n();
        if k >= n {
            return Ok(self.relation.eval(&alpha).is_zero().then_some(alpha));
        }
        let pk = self.ring.p().pow(k as u32);
        let q = self.residue.len();
        for idx in 0..q.pow(4) {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Ok(None);
            }
            let mut next = alpha.clone();
            let mut rest = idx;
            for slot in next.iter_mut() {
                let d = &self.residue[rest % q];
                rest /= q;
                if !d.is_zero() {
                    *slot = &*slot + &self.ring.teichmuller(d)?.scale_int(pk);
                }
            }
            if self.relation.eval(&next).in_ideal(k + 1) {
                if let Some(found) = self.extend(next, k + 1)? {
                    return Ok(Some(found));
                }
                if self.nodes > self.budget {
                    return Ok(None);
                }
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangianWitness {
    /// Columns `X1, X2, Y1, Y2`.
    pub basis: Matrix,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LagrangianSearch {
    Found(LagrangianWitness),
    /// Every lift of the Hodge filtration fails to be isotropic at this
    /// precision.
    Exhausted { precision: usize, nodes: u64 },
    /// The node budget ran out before the search finished.
    BudgetExceeded { nodes: u64 },
}

/// Node budget used when none is given.
pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;

impl fmt::Debug for DieudonneModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DieudonneModule over {}\nF:\n{}V:\n{}J:\n{}", self.ring, self.f, self.v, self.j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(q: u64, n: usize) -> WittRing {
        WittRing::with_order(q, n).unwrap()
    }

    #[test]
    fn fixtures_are_valid() {
        for (q, n) in [(2, 2), (3, 3), (4, 2), (5, 2), (9, 3)] {
            let r = ring(q, n);
            for fx in [Fixture::Iia, Fixture::Iib, Fixture::Ordinary, Fixture::LagrangianGeneric] {
                let m = DieudonneModule::fixture(fx, &r).unwrap();
                let report = m.validate();
                assert!(report.valid, "{fx} over {r}: {report:?}");
            }
        }
        for q in [8, 27] {
            let m = DieudonneModule::fixture(Fixture::Supersingular, &ring(q, 2)).unwrap();
            assert!(m.is_valid(), "{m:?}");
        }
    }

    #[test]
    fn fixtures_need_precision_two() {
        assert!(matches!(
            DieudonneModule::fixture(Fixture::Iib, &ring(2, 1)),
            Err(DieudonneError::PrecisionTooLow { .. })
        ));
        assert!(DieudonneModule::fixture(Fixture::Supersingular, &ring(9, 2)).is_err());
    }

    #[test]
    fn iib_verschiebung() {
        let r = ring(3, 2);
        let m = DieudonneModule::fixture(Fixture::Iib, &r).unwrap();
        let v = m.v_matrix();
        // V X1 = Y1, V Y1 = p X1
        assert_eq!(v.col(0), vec![r.zero(), r.zero(), r.one(), r.zero()]);
        assert_eq!(v.col(2), vec![r.uniformizer(), r.zero(), r.zero(), r.zero()]);
    }

    #[test]
    fn invariants_of_fixtures() {
        let r = ring(4, 2);
        let table = [
            (Fixture::Iia, 2, 0),
            (Fixture::Iib, 2, 0),
            (Fixture::Ordinary, 0, 2),
            (Fixture::LagrangianGeneric, 1, 1),
        ];
        for (fx, a, f) in table {
            let m = DieudonneModule::fixture(fx, &r).unwrap();
            assert_eq!((m.a_number(), m.p_rank()), (a, f), "{fx}");
        }
        let ss = DieudonneModule::fixture(Fixture::Supersingular, &ring(8, 2)).unwrap();
        assert_eq!((ss.a_number(), ss.p_rank()), (1, 0));
    }

    #[test]
    fn dual_lattices_of_superspecial_fixtures() {
        let r = ring(2, 3);
        let p = 2;
        let iib = DieudonneModule::fixture(Fixture::Iib, &r).unwrap();
        let expected = Matrix::from_ints(&r, &[vec![p, 0, 0, 0], vec![0, p, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]);
        assert!(iib.dual_lattice().unwrap().same_column_span_mod(&expected, 2));
        let iia = DieudonneModule::fixture(Fixture::Iia, &r).unwrap();
        let expected = Matrix::from_ints(&r, &[vec![p, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, p, 0], vec![0, 0, 0, 1]]);
        assert!(iia.dual_lattice().unwrap().same_column_span_mod(&expected, 2));
    }

    #[test]
    fn kernel_dichotomy() {
        let r = ring(9, 2);
        let kt = |fx| DieudonneModule::fixture(fx, &r).unwrap().kernel_type().unwrap();
        assert_eq!(kt(Fixture::Iib), KernelType::AlphaSquare);
        assert_eq!(kt(Fixture::Iia), KernelType::NonAlphaSquare);
        assert_eq!(kt(Fixture::Ordinary), KernelType::NotSuperspecial);
    }

    #[test]
    fn witness_search() {
        for (q, n) in [(2, 2), (2, 3), (4, 2), (4, 3)] {
            let r = ring(q, n);
            let iia = DieudonneModule::fixture(Fixture::Iia, &r).unwrap();
            let LagrangianSearch::Found(w) = iia.lagrangian_witness_search(DEFAULT_SEARCH_BUDGET).unwrap() else {
                panic!("iia is Lagrangian")
            };
            assert!(iia.verify_witness(&w.basis));
            let iib = DieudonneModule::fixture(Fixture::Iib, &r).unwrap();
            assert!(matches!(
                iib.lagrangian_witness_search(DEFAULT_SEARCH_BUDGET).unwrap(),
                LagrangianSearch::Exhausted { .. }
            ));
        }
    }

    #[test]
    fn generic_witness_is_the_defining_basis() {
        let r = ring(3, 3);
        let m = DieudonneModule::fixture(Fixture::LagrangianGeneric, &r).unwrap();
        let LagrangianSearch::Found(w) = m.lagrangian_witness_search(DEFAULT_SEARCH_BUDGET).unwrap() else {
            panic!("Lagrangian fixture")
        };
        assert_eq!(w.basis, Matrix::identity(&r, 4));
    }
}
