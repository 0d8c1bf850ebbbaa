use std::f64::consts::PI;

use asyncswap::quantum::{
    canonical_state, concurrence_eof, fidelity, parse_density_operator, phase_max_fidelity, trace_distance,
    witness_value, write_density_operator, CMatrix, CanonicalState, DensityOperator, PhaseFamily, StateVector, C64,
};
use nalgebra::Matrix2;
use proptest::prelude::*;

fn ginibre(dim: usize, re: &[f64], im: &[f64]) -> DensityOperator {
    let g = CMatrix::from_fn(dim, dim, |r, c| C64::new(re[r * dim + c], im[r * dim + c]));
    DensityOperator::from_unnormalized(&g * g.adjoint()).unwrap()
}

fn density(dim: usize) -> impl Strategy<Value = DensityOperator> {
    let n = dim * dim;
    (prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-1.0..1.0f64, n))
        .prop_filter("non-degenerate", |(re, im)| re.iter().chain(im).any(|x| x.abs() > 1e-3))
        .prop_map(move |(re, im)| ginibre(dim, &re, &im))
}

fn pure2() -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| StateVector::normalized(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn unitary(alpha: f64, beta: f64, gamma: f64) -> Matrix2<C64> {
    let (c, s) = (alpha.cos(), alpha.sin());
    Matrix2::new(
        C64::from_polar(c, beta),
        C64::from_polar(-s, gamma),
        C64::from_polar(s, -gamma),
        C64::from_polar(c, -beta),
    )
}

fn grid_max(rho: &DensityOperator, family: PhaseFamily, n: usize) -> f64 {
    (0..=n)
        .map(|k| -PI + 2.0 * PI * k as f64 / n as f64)
        .map(|t| rho.expectation(&family.member(t).unwrap()).unwrap())
        .fold(f64::MIN, f64::max)
}

proptest! {
    #[test]
    fn phase_maximum_dominates_the_grid(rho2 in density(4), rho3 in density(8)) {
        for (rho, family) in [(&rho2, PhaseFamily::PsiMinusTheta), (&rho3, PhaseFamily::GhzTheta)] {
            let pm = phase_max_fidelity(rho, family).unwrap();
            let at_star = rho.expectation(&family.member(pm.theta_star).unwrap()).unwrap();
            prop_assert!((at_star - pm.value).abs() < 1e-12);
            prop_assert!(pm.value >= grid_max(rho, family, 720) - 1e-12);
            prop_assert!((-PI..=PI).contains(&pm.theta_star));
        }
        let pm = phase_max_fidelity(&rho3, PhaseFamily::GhzTheta).unwrap();
        prop_assert!((witness_value(&rho3, pm.theta_star).unwrap() + pm.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_state_concurrence(psi in pure2()) {
        let a = |i: usize| psi.amplitude(i);
        let want = 2.0 * (a(0) * a(3) - a(1) * a(2)).norm();
        let (c, e) = concurrence_eof(&psi.projector()).unwrap();
        prop_assert!((c - want).abs() < 1e-7, "{} vs {}", c, want);
        prop_assert!((0.0..=1.0).contains(&e));
    }

    #[test]
    fn concurrence_ignores_local_unitaries(rho in density(4), a in 0.0..PI, b in -PI..PI, g in -PI..PI) {
        let u = unitary(a, b, g);
        let v = unitary(b, g, a);
        let moved = rho.apply_local_unitary(0, &u).unwrap().apply_local_unitary(1, &v).unwrap();
        let (c0, e0) = concurrence_eof(&rho).unwrap();
        let (c1, e1) = concurrence_eof(&moved).unwrap();
        prop_assert!((c0 - c1).abs() < 1e-7 && (e0 - e1).abs() < 1e-6);
    }

    #[test]
    fn trace_distance_is_a_metric(a in density(4), b in density(4), c in density(4)) {
        let d = |x: &DensityOperator, y: &DensityOperator| trace_distance(x, y).unwrap();
        prop_assert!(d(&a, &a) < 1e-12);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!(d(&a, &b) <= 1.0 + 1e-12);
    }

    #[test]
    fn text_round_trip_is_exact(rho in density(8)) {
        let back = parse_density_operator(&write_density_operator(&rho)).unwrap();
        prop_assert_eq!(back, rho);
    }

    #[test]
    fn partial_trace_keeps_unit_trace(rho in density(8)) {
        for keep in [vec![0], vec![1, 2], vec![0, 2]] {
            let r = rho.partial_trace(&keep).unwrap();
            prop_assert_eq!(r.dim(), 1 << keep.len());
            let tr: f64 = (0..r.dim()).map(|i| r.entry(i, i).re).sum();
            prop_assert!((tr - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn werner_family_closed_forms() {
    let psi = canonical_state(CanonicalState::PsiMinus).unwrap().projector();
    let white = DensityOperator::maximally_mixed(2);
    for k in 0..=100 {
        let p = k as f64 / 100.0;
        let rho = psi.mix(p, &white).unwrap();
        let (c, _) = concurrence_eof(&rho).unwrap();
        assert!((c - (0.0f64).max((3.0 * p - 1.0) / 2.0)).abs() < 1e-9, "p={p}");
        let f = fidelity(&rho, &canonical_state(CanonicalState::PsiMinus).unwrap()).unwrap();
        assert!((f - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12);
    }
}

#[test]
fn ghz_marginals_and_phases() {
    let ghz = canonical_state(CanonicalState::Ghz).unwrap().projector();
    let two = ghz.partial_trace(&[0, 1]).unwrap();
    for (i, want) in [0.5, 0.0, 0.0, 0.5].into_iter().enumerate() {
        assert!((two.entry(i, i).re - want).abs() < 1e-15);
    }
    assert!(two.entry(0, 3).norm() < 1e-15);
    let flipped = canonical_state(CanonicalState::GhzTheta(PI)).unwrap();
    assert!((flipped.amplitude(7) + flipped.amplitude(0)).norm() < 1e-15);
    assert!(canonical_state(CanonicalState::GhzTheta(4.0)).is_err());
}
