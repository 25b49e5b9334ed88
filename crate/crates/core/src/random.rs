//! Seeded generators for series, forms and base changes.

use rand::Rng;

use crate::linalg::Matrix;
use crate::quadform::QuadraticForm;
use crate::series::{SeriesRing, TruncatedSeries};
use crate::witt::WittRing;

/// Each monomial of degree in `degrees` gets a random coefficient with
/// probability `density`.
pub fn random_series<R: Rng + ?Sized>(
    ring: &SeriesRing,
    degrees: std::ops::Range<usize>,
    density: f64,
    rng: &mut R,
) -> TruncatedSeries {
    let coeff = ring.coeff_ring();
    let mut out = ring.zero();
    for rank in 0..ring.monomial_count() {
        let exp = ring.monomial(rank);
        let d = exp.iter().sum::<u32>() as usize;
        if degrees.contains(&d) && rng.gen_bool(density) {
            let t = ring.term(exp, &coeff.random(rng)).expect("monomial of the ring");
            out = &out + &t;
        }
    }
    out
}

/// A quadratic form whose Gram matrix is invertible mod `p`.
///
/// For `p = 2` the rank must be even, otherwise no such form exists.
pub fn random_nondegenerate_form<R: Rng + ?Sized>(ring: &WittRing, nvars: usize, rng: &mut R) -> QuadraticForm {
    assert!(ring.p() != 2 || nvars.is_multiple_of(2), "odd rank forms are degenerate in characteristic 2");
    loop {
        let upper = (0..nvars * (nvars + 1) / 2).map(|_| ring.random(rng)).collect();
        let q = QuadraticForm::new(ring, nvars, upper).expect("right length");
        if q.is_nondegenerate() {
            return q;
        }
    }
}

/// `a + sum a_i x_i + Q(x) + (terms of degree >= 3)` with `a` in `pW`, every
/// `a_i` in `p^r W` and `Q` non-degenerate.
pub fn random_reducible_series<R: Rng + ?Sized>(ring: &SeriesRing, r: usize, rng: &mut R) -> TruncatedSeries {
    let coeff = ring.coeff_ring();
    let mut f = ring.constant(&coeff.random_in_ideal(1, rng));
    for x in ring.vars() {
        f = &f + &x.scalar_mul(&coeff.random_in_ideal(r, rng));
    }
    let q = random_nondegenerate_form(coeff, ring.nvars(), rng);
    f = &f + &q.to_series(ring).expect("same coefficient ring");
    &f + &random_series(ring, 3..ring.degree(), 0.5, rng)
}

/// A uniformly random invertible matrix.
pub fn random_invertible_matrix<R: Rng + ?Sized>(ring: &WittRing, size: usize, rng: &mut R) -> Matrix {
    loop {
        let m = Matrix::from_fn(ring, size, size, |_, _| ring.random(rng));
        if m.is_invertible() {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generators_meet_their_contracts() {
        let mut rng = StdRng::seed_from_u64(7);
        let w = WittRing::with_order(2, 3).unwrap();
        let sr = SeriesRing::new(&w, 2, 6).unwrap();
        for _ in 0..10 {
            let f = random_reducible_series(&sr, 2, &mut rng);
            assert!(f.constant_term().in_ideal(1));
            assert!(f.linear_coefficients().iter().all(|c| c.in_ideal(2)));
            assert!(QuadraticForm::quadratic_part(&f).is_nondegenerate());
            assert!(random_invertible_matrix(&w, 4, &mut rng).is_invertible());
        }
    }
}
