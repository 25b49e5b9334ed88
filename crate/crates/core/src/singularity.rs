//! Normal forms of `f = a + sum a_i x_i + Q(x) + (higher terms)` with
//! non-degenerate quadratic part `Q`, over `A = W_n(F_q)`.
//!
//! The reduction runs in two stages. First a constant shift `x -> x + b`
//! with `b` in the maximal ideal removes the linear part. Then, degree by
//! degree, a substitution `x -> x + c(x)` with `c` homogeneous of degree
//! `d - 1` cancels the degree `d` part against the bilinear form of `Q`.
//! The output satisfies `f(phi) = u * (a' + Q'(x))` exactly up to the
//! truncation degree.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::quadform::QuadraticForm;
use crate::series::{SeriesError, TruncatedSeries};
use crate::witt::WittElement;

/// Graded piece of the input that violates a precondition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GradedPart {
    Constant,
    Linear,
    Quadratic,
    Higher,
}

impl fmt::Display for GradedPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GradedPart::Constant => "constant term",
            GradedPart::Linear => "linear part",
            GradedPart::Quadratic => "quadratic part",
            GradedPart::Higher => "higher-degree part",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SingularityError {
    #[error("precondition on the {part} failed: {reason}")]
    Precondition { part: GradedPart, reason: String },
    #[error("linear term did not vanish after {0} correction steps")]
    NotConverged(usize),
    #[error("constant term moved by more than the guaranteed amount")]
    Refinement,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn precondition(part: GradedPart, reason: impl Into<String>) -> SingularityError {
    SingularityError::Precondition { part, reason: reason.into() }
}

/// Outcome of removing the linear part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearReduction {
    /// `series = f(x + shift)` has no linear part.
    Shifted { shift: Vec<WittElement>, series: TruncatedSeries },
    /// The coefficient of this variable is a unit: `A[[x]]/(f)` is smooth.
    Smooth { variable: usize },
}

/// `f(phi) = unit * (a_prime + q_prime)` up to the truncation degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormResult {
    pub a_prime: WittElement,
    pub q_prime: QuadraticForm,
    pub phi: Vec<TruncatedSeries>,
    pub unit: TruncatedSeries,
}

impl NormalFormResult {
    /// `unit * (a' + Q')` as a series in the ring of `phi`.
    pub fn target(&self) -> TruncatedSeries {
        let ring = self.unit.ring();
        let body = &ring.constant(&self.a_prime) + &self.q_prime.to_series(ring).expect("same ring");
        &self.unit * &body
    }

    /// Re-substitutes `phi` into `f` and compares with [`Self::target`].
    pub fn certifies(&self, f: &TruncatedSeries) -> bool {
        f.substitute(&self.phi).is_ok_and(|g| g == self.target())
    }

    pub fn phi_is_identity(&self) -> bool {
        self.phi == self.unit.ring().vars()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    Smooth { variable: usize },
    NormalForm(NormalFormResult),
}

/// Local ring `A[[x]]/(f)` up to isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalRingClass {
    /// Some coefficient of `x_variable` is a unit.
    Smooth { variable: usize },
    /// `A[[x]]/(a' + Q'(x))` with `Q'` non-degenerate.
    OrdinaryDoublePoint { a_prime: WittElement, valuation: usize },
    /// The constant term is a unit, so the quotient is zero.
    UnitIdeal,
    /// The quadratic part is degenerate; no claim is made.
    Undetermined,
}

impl LocalRingClass {
    pub fn tag(&self) -> &'static str {
        match self {
            LocalRingClass::Smooth { .. } => "Smooth",
            LocalRingClass::OrdinaryDoublePoint { .. } => "OrdinaryDoublePoint",
            LocalRingClass::UnitIdeal => "UnitIdeal",
            LocalRingClass::Undetermined => "Undetermined",
        }
    }
}

fn gram_inverse(f: &TruncatedSeries) -> Result<Matrix, SingularityError> {
    let q = QuadraticForm::quadratic_part(f);
    q.gram()
        .inverse()
        .map_err(|_| precondition(GradedPart::Quadratic, "the quadratic form is degenerate modulo p"))
}

fn unit_linear(f: &TruncatedSeries) -> Option<usize> {
    f.linear_coefficients().iter().position(|c| c.is_unit())
}

/// Finds `b` in the maximal ideal such that `f(x + b)` has no linear part.
pub fn kill_linear_term(f: &TruncatedSeries) -> Result<LinearReduction, SingularityError> {
    if f.constant_term().is_unit() {
        return Err(precondition(GradedPart::Constant, "the constant term is a unit"));
    }
    if let Some(variable) = unit_linear(f) {
        return Ok(LinearReduction::Smooth { variable });
    }
    let ginv = gram_inverse(f)?;
    let ring = f.ring();
    let coeff = ring.coeff_ring();
    let vars = ring.vars();
    let mut shift = vec![coeff.zero(); ring.nvars()];
    let mut g = f.clone();
    let max_steps = 2 * coeff.n() + 4;
    for _ in 0..max_steps {
        let lin = g.linear_coefficients();
        if lin.iter().all(|c| c.is_zero()) {
            return Ok(LinearReduction::Shifted { shift, series: g });
        }
        // the linear part of f(x + b) is a + G b + O(b^2)
        let step = ginv.apply(&lin);
        for (b, s) in shift.iter_mut().zip(&step) {
            *b = &*b - s;
        }
        let phi: Vec<TruncatedSeries> = vars.iter().zip(&shift).map(|(x, b)| x + &ring.constant(b)).collect();
        g = f.substitute(&phi)?;
    }
    Err(SingularityError::NotConverged(max_steps))
}

/// Coordinate change removing every term of degree `3..D` from a series
/// `a + Q(x) + (higher)` without linear part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripResult {
    pub phi: Vec<TruncatedSeries>,
    pub unit: TruncatedSeries,
    pub q_prime: QuadraticForm,
}

pub fn strip_higher_terms(f: &TruncatedSeries) -> Result<StripResult, SingularityError> {
    if f.linear_coefficients().iter().any(|c| !c.is_zero()) {
        return Err(precondition(GradedPart::Linear, "the linear part must vanish"));
    }
    let ginv = gram_inverse(f)?;
    let ring = f.ring();
    let n = ring.nvars();
    let vars = ring.vars();
    let mut phi = vars.clone();
    let mut g = f.clone();
    for d in 3..ring.degree() {
        let h = g.graded_part(d)?;
        if h.is_zero() {
            continue;
        }
        let parts = split_by_first_variable(&h);
        // x -> x - G^{-1} h turns B(x, c) into -h
        let mut psi = Vec::with_capacity(n);
        for i in 0..n {
            let mut c = ring.zero();
            for (j, hj) in parts.iter().enumerate() {
                let w = ginv.get(i, j);
                if !w.is_zero() {
                    c = &c - &hj.scalar_mul(w);
                }
            }
            psi.push(&vars[i] + &c);
        }
        g = g.substitute(&psi)?;
        phi = phi.iter().map(|p| p.substitute(&psi)).collect::<Result<_, _>>()?;
        debug_assert!(g.graded_part(d)?.is_zero());
    }
    let q_prime = QuadraticForm::quadratic_part(&g);
    debug_assert!(g.tail_from(3).is_zero());
    Ok(StripResult { phi, unit: ring.one(), q_prime })
}

/// Writes a homogeneous `h` as `sum_i x_i h_i`, giving each monomial to its
/// first variable with positive exponent.
fn split_by_first_variable(h: &TruncatedSeries) -> Vec<TruncatedSeries> {
    let ring = h.ring();
    let mut parts = vec![ring.zero(); ring.nvars()];
    for (mut e, c) in h.terms() {
        let i = e.iter().position(|&k| k > 0).expect("homogeneous of positive degree");
        e[i] -= 1;
        parts[i] = &parts[i] + &ring.term(&e, &c).expect("same ring");
    }
    parts
}

/// Reduction needing only `a, a_i` in the maximal ideal. When all `a_i`
/// lie in `p^r W` the constant term moves by an element of `p^(2r) W`.
pub fn reduce(f: &TruncatedSeries) -> Result<Reduction, SingularityError> {
    let (shift, shifted) = match kill_linear_term(f)? {
        LinearReduction::Smooth { variable } => return Ok(Reduction::Smooth { variable }),
        LinearReduction::Shifted { shift, series } => (shift, series),
    };
    let strip = strip_higher_terms(&shifted)?;
    let ring = f.ring();
    let phi = strip.phi.iter().zip(&shift).map(|(p, b)| p + &ring.constant(b)).collect();
    Ok(Reduction::NormalForm(NormalFormResult {
        a_prime: shifted.constant_term(),
        q_prime: strip.q_prime,
        phi,
        unit: strip.unit,
    }))
}

/// Full normal form under the hypotheses `a` in `m`, `a_i` in `m^2`, `Q`
/// non-degenerate; then `a' = a mod m^3`, which is checked before returning.
/// A unit linear coefficient short-circuits to [`Reduction::Smooth`].
pub fn normal_form(f: &TruncatedSeries) -> Result<Reduction, SingularityError> {
    if !f.constant_term().in_ideal(1) {
        return Err(precondition(GradedPart::Constant, "the constant term must lie in the maximal ideal"));
    }
    if let Some(variable) = unit_linear(f) {
        return Ok(Reduction::Smooth { variable });
    }
    if let Some(i) = f.linear_coefficients().iter().position(|c| !c.in_ideal(2)) {
        return Err(precondition(
            GradedPart::Linear,
            format!("the coefficient of {} must lie in p^2 W", f.ring().names()[i]),
        ));
    }
    let reduction = reduce(f)?;
    if let Reduction::NormalForm(nf) = &reduction {
        let k = 3.min(f.ring().coeff_ring().n());
        if !nf.a_prime.congruent(&f.constant_term(), k) {
            return Err(SingularityError::Refinement);
        }
    }
    Ok(reduction)
}

/// Isomorphism type of `A[[x]]/(f)`; never claims a double point it cannot
/// certify.
pub fn classify_local_ring(f: &TruncatedSeries) -> LocalRingClass {
    if f.constant_term().is_unit() {
        return LocalRingClass::UnitIdeal;
    }
    if let Some(variable) = unit_linear(f) {
        return LocalRingClass::Smooth { variable };
    }
    if !QuadraticForm::quadratic_part(f).is_nondegenerate() {
        return LocalRingClass::Undetermined;
    }
    match reduce(f) {
        Ok(Reduction::NormalForm(nf)) => {
            let valuation = nf.a_prime.valuation();
            LocalRingClass::OrdinaryDoublePoint { a_prime: nf.a_prime, valuation }
        }
        Ok(Reduction::Smooth { variable }) => LocalRingClass::Smooth { variable },
        Err(_) => LocalRingClass::Undetermined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SeriesRing;
    use crate::witt::WittRing;

    fn ring(q: u64, n: usize, k: usize, d: usize) -> SeriesRing {
        SeriesRing::new(&WittRing::with_order(q, n).unwrap(), k, d).unwrap()
    }

    #[test]
    fn no_linear_term_means_no_shift() {
        let r = ring(2, 3, 2, 4);
        let f = r.parse("x1*x2").unwrap();
        match kill_linear_term(&f).unwrap() {
            LinearReduction::Shifted { shift, series } => {
                assert!(shift.iter().all(|b| b.is_zero()));
                assert_eq!(series, f);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rectangle_shift() {
        let r = ring(2, 3, 2, 4);
        let f = r.parse("x1*x2 + p*x1").unwrap();
        let LinearReduction::Shifted { shift, series } = kill_linear_term(&f).unwrap() else {
            panic!("not smooth")
        };
        let c = r.coeff_ring();
        assert_eq!(shift, vec![c.zero(), -c.uniformizer()]);
        assert_eq!(series, r.parse("x1*x2").unwrap());
    }

    #[test]
    fn cubic_tail_is_stripped() {
        let r = ring(2, 3, 4, 6);
        let f = r.parse("p + x1*x4 - x2*x3 + x1^3").unwrap();
        let s = strip_higher_terms(&f).unwrap();
        let g = f.substitute(&s.phi).unwrap();
        for d in 3..6 {
            assert!(g.graded_part(d).unwrap().is_zero(), "degree {d} in {g}");
        }
        assert_eq!(g, r.parse("p + x1*x4 - x2*x3").unwrap());
    }

    #[test]
    fn exact_chart_equation_is_its_own_normal_form() {
        let r = ring(3, 3, 4, 6);
        let f = r.parse("p + x1*x4 - x2*x3").unwrap();
        let Reduction::NormalForm(nf) = normal_form(&f).unwrap() else { panic!("smooth") };
        assert_eq!(nf.a_prime, r.coeff_ring().uniformizer());
        assert!(nf.phi_is_identity());
        assert_eq!(nf.q_prime, QuadraticForm::quadratic_part(&f));
        assert!(nf.certifies(&f));
    }

    #[test]
    fn perturbed_chart_equation_keeps_valuation_one() {
        let r = ring(3, 3, 4, 6);
        let f = r.parse("p + x1*x4 - x2*x3 + x1^3 + x2*x3*x4 + 9*x1 + 9*x3 + x4^5").unwrap();
        let Reduction::NormalForm(nf) = normal_form(&f).unwrap() else { panic!("smooth") };
        assert_eq!(nf.a_prime.valuation(), 1);
        assert!(nf.a_prime.congruent(&r.coeff_ring().uniformizer(), 3));
        assert!(nf.certifies(&f));
    }

    #[test]
    fn unit_linear_coefficient_is_smooth() {
        let r = ring(3, 2, 4, 4);
        let f = r.parse("-x3 + p*x2 + x1*x4").unwrap();
        assert_eq!(normal_form(&f).unwrap(), Reduction::Smooth { variable: 2 });
        assert_eq!(classify_local_ring(&f), LocalRingClass::Smooth { variable: 2 });
    }

    #[test]
    fn precondition_errors_name_the_part() {
        let r = ring(3, 3, 2, 4);
        let e = normal_form(&r.parse("1 + x1*x2").unwrap()).unwrap_err();
        assert!(matches!(e, SingularityError::Precondition { part: GradedPart::Constant, .. }));
        let e = normal_form(&r.parse("p*x1 + x1*x2").unwrap()).unwrap_err();
        assert!(matches!(e, SingularityError::Precondition { part: GradedPart::Linear, .. }));
        let e = normal_form(&r.parse("p + x1^2").unwrap()).unwrap_err();
        assert!(matches!(e, SingularityError::Precondition { part: GradedPart::Quadratic, .. }));
    }

    #[test]
    fn classification_cases() {
        let r = ring(5, 3, 2, 6);
        assert_eq!(classify_local_ring(&r.parse("x1^3 + x2^3").unwrap()), LocalRingClass::Undetermined);
        assert_eq!(classify_local_ring(&r.parse("1 + x1").unwrap()), LocalRingClass::UnitIdeal);
        let odp = classify_local_ring(&r.parse("p + x1*x2").unwrap());
        assert_eq!(
            odp,
            LocalRingClass::OrdinaryDoublePoint { a_prime: r.coeff_ring().uniformizer(), valuation: 1 }
        );
    }

    #[test]
    fn normal_form_is_idempotent() {
        let r = ring(9, 2, 2, 6);
        let f = r.parse("p + x1*x2 + x1^2*x2 + z*x2^4").unwrap();
        let Reduction::NormalForm(nf) = normal_form(&f).unwrap() else { panic!("smooth") };
        let g = &r.constant(&nf.a_prime) + &nf.q_prime.to_series(&r).unwrap();
        let Reduction::NormalForm(again) = normal_form(&g).unwrap() else { panic!("smooth") };
        assert!(again.phi_is_identity());
        assert_eq!(again.a_prime, nf.a_prime);
        assert_eq!(again.q_prime, nf.q_prime);
    }
}
