use rand::rngs::StdRng;
use rand::SeedableRng;

use sll_core::deformation::{default_degree, relation_ring, DeformationError, EquicharDisplay, HodgeFrame};
use sll_core::dieudonne::{DieudonneError, DieudonneModule, Fixture};
use sll_core::random::random_invertible_matrix;
use sll_core::singularity::LocalRingClass;
use sll_core::{Matrix, TruncatedSeries, WittRing};

fn ring(q: u64, n: usize) -> WittRing {
    WittRing::with_order(q, n).unwrap()
}

fn frame(fx: Fixture, r: &WittRing) -> HodgeFrame {
    HodgeFrame::detect(DieudonneModule::fixture(fx, r).unwrap()).unwrap()
}

#[test]
fn iib_relation_is_the_quadric() {
    for (q, n) in [(2u64, 2usize), (3, 3), (4, 3), (5, 2), (25, 3)] {
        let r = ring(q, n);
        let fr = frame(Fixture::Iib, &r);
        assert_eq!(fr.y_indices(), [2, 3]);
        assert_eq!(fr.x_indices(), [0, 1]);
        let d = default_degree(r.p());
        let f = fr.deformation_equation(d).unwrap();
        assert_eq!(f, relation_ring(&r, d).unwrap().parse("p + t11*t22 - t12*t21").unwrap());
        assert_eq!(
            fr.classify_point(d).unwrap(),
            LocalRingClass::OrdinaryDoublePoint { a_prime: r.uniformizer(), valuation: 1 }
        );
    }
}

#[test]
fn points_with_a_lagrangian_are_smooth() {
    for fx in [Fixture::Iia, Fixture::LagrangianGeneric] {
        let r = ring(9, 3);
        let fr = frame(fx, &r);
        let f = fr.deformation_equation(6).unwrap();
        assert_eq!(f, f.ring().parse("-t21 + p*t12").unwrap(), "{fx}");
        assert!(f.linear_coefficients().iter().any(|c| c.is_unit()));
        assert_eq!(fr.classify_point(6).unwrap(), LocalRingClass::Smooth { variable: 2 });
    }
}

#[test]
fn self_pairings_of_the_lifts_vanish() {
    let r = ring(5, 3);
    let sr = relation_ring(&r, 6).unwrap();
    for fx in [Fixture::Iia, Fixture::Iib, Fixture::LagrangianGeneric] {
        let fr = frame(fx, &r);
        for a in 0..2 {
            assert!(fr.expand_pairing(a, a, &sr).unwrap().is_zero());
        }
        let f = fr.expand_pairing(0, 1, &sr).unwrap();
        assert_eq!(fr.expand_pairing(1, 0, &sr).unwrap(), -&f);
    }
}

#[test]
fn swapping_x_vectors_swaps_the_deformation_variables() {
    for fx in [Fixture::Iia, Fixture::Iib, Fixture::LagrangianGeneric] {
        let r = ring(3, 3);
        let m = DieudonneModule::fixture(fx, &r).unwrap();
        let swap = Matrix::identity(&r, 4).select_columns(&[1, 0, 2, 3]);
        let swapped = HodgeFrame::new(m.base_change(&swap).unwrap(), [2, 3]).unwrap();
        let original = HodgeFrame::new(m, [2, 3]).unwrap();
        let f = original.deformation_equation(6).unwrap();
        let g = swapped.deformation_equation(6).unwrap();
        let sr = f.ring();
        let perm: Vec<TruncatedSeries> = [1, 0, 3, 2].iter().map(|&k| sr.var(k)).collect();
        assert_eq!(g, f.substitute(&perm).unwrap(), "{fx}");
    }
}

#[test]
fn changing_the_complement_keeps_a_double_point() {
    let mut rng = StdRng::seed_from_u64(61);
    for p in [3u64, 5] {
        let r = ring(p, 3);
        let m = DieudonneModule::fixture(Fixture::Iib, &r).unwrap();
        for _ in 0..25 {
            let a = random_invertible_matrix(&r, 2, &mut rng);
            let b: Vec<_> = (0..4).map(|_| r.random(&mut rng)).collect();
            // new X_j = sum_i a_ij X_i + b_ij Y_i, with Y unchanged
            let g = Matrix::from_fn(&r, 4, 4, |i, j| match (i < 2, j < 2) {
                (true, true) => a.get(i, j).clone(),
                (false, true) => b[2 * (i - 2) + j].clone(),
                (true, false) => r.zero(),
                (false, false) => r.from_int((i == j) as i64),
            });
            let moved = m.base_change(&g).unwrap();
            assert!(moved.is_valid());
            let fr = HodgeFrame::detect(moved).unwrap();
            assert_eq!(fr.y_indices(), [2, 3]);
            match fr.classify_point(default_degree(p)).unwrap() {
                LocalRingClass::OrdinaryDoublePoint { a_prime, valuation } => {
                    assert_eq!(valuation, 1);
                    assert_eq!(a_prime.valuation(), 1);
                }
                other => panic!("{other:?}"),
            }
        }
    }
}

#[test]
fn relation_mod_p_is_the_display_determinant() {
    for q in [2u64, 3, 4, 5, 9] {
        let r = ring(q, 3);
        let display = EquicharDisplay::universal(&r, 6).unwrap();
        let relation = frame(Fixture::Iib, &r).deformation_equation(6).unwrap();
        let det = display.nonordinary_locus();
        assert_eq!(relation.reduce_mod_p().truncate(3).unwrap(), det.truncate(3).unwrap());
        assert_eq!(relation.reduce_mod_p(), det);
    }
}

#[test]
fn display_with_vanishing_t_is_supersingular_everywhere() {
    let k = ring(9, 1);
    let sr = relation_ring(&k, 5).unwrap();
    let zero = || sr.zero();
    let d = EquicharDisplay::from_t(&sr, [[zero(), zero()], [zero(), zero()]]).unwrap();
    assert!(d.nonordinary_locus().is_zero());
    assert!(d.tangent_frobenius().iter().flatten().all(|s| s.is_zero()));
}

#[test]
fn display_determinant_evaluates_pointwise() {
    let r = ring(5, 2);
    let d = EquicharDisplay::universal(&r, 5).unwrap();
    let k = d.ring().coeff_ring().clone();
    assert_eq!(k.q(), 5);
    for (a, b, c, e) in [(1, 2, 3, 4), (0, 1, 1, 0), (2, 2, 2, 2)] {
        let pt = [a, b, c, e].map(|x| k.from_int(x));
        assert_eq!(d.nonordinary_locus().eval(&pt).unwrap(), k.from_int(a * e - b * c));
    }
}

#[test]
fn malformed_displays_are_rejected() {
    let k = ring(3, 1);
    let sr = relation_ring(&k, 4).unwrap();
    let e = |i: usize| -> Vec<TruncatedSeries> { (0..4).map(|k| if k == i { sr.one() } else { sr.zero() }).collect() };
    assert!(EquicharDisplay::new([e(2), e(3)], [e(2), e(3)]).is_ok());
    assert!(matches!(EquicharDisplay::new([e(3), e(2)], [e(2), e(3)]), Err(DeformationError::Display(_))));
    assert!(matches!(EquicharDisplay::new([e(2), e(3)], [e(2), e(0)]), Err(DeformationError::Display(_))));
    assert!(EquicharDisplay::new([e(2)[..3].to_vec(), e(3)], [e(2), e(3)]).is_err());
}

#[test]
fn frames_must_span_the_hodge_filtration() {
    let r = ring(3, 2);
    let m = DieudonneModule::fixture(Fixture::Iib, &r).unwrap();
    assert!(HodgeFrame::new(m.clone(), [0, 1]).is_err());
    assert!(HodgeFrame::new(m.clone(), [2, 2]).is_err());
    assert!(HodgeFrame::new(m, [2, 4]).is_err());
    let ss = DieudonneModule::fixture(Fixture::Supersingular, &ring(8, 2)).unwrap();
    assert!(matches!(HodgeFrame::detect(ss), Err(DeformationError::Module(DieudonneError::Frame(_)))));
}

#[test]
fn default_degree_grows_with_p() {
    assert_eq!(default_degree(2), 6);
    assert_eq!(default_degree(5), 6);
    assert_eq!(default_degree(7), 8);
}
