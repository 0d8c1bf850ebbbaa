//! The analytic post-selected states against the Fock-basis oracle.

mod common;

use asyncswap::optics::{bsm_swap, qpc_ghz, InterferenceVisibility, SourceLabel, SourceSpec, SwapPattern};
use asyncswap::quantum::{trace_distance, CMatrix, DensityOperator, C64};
use common::fock::{apply_kraus, ghz_oracle, random_density, random_pure, swap_oracle};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn swap_matches_fock_oracle() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let ra = random_density(&mut rng, 4);
        let rb = random_density(&mut rng, 4);
        let a = SourceSpec::new(ra.clone(), SourceLabel::A).unwrap();
        let b = SourceSpec::new(rb.clone(), SourceLabel::B).unwrap();
        let input = ra.matrix().kronecker(rb.matrix());
        for v in [0.0, 0.5, 1.0] {
            let got = bsm_swap(&a, &b, InterferenceVisibility::new(v).unwrap(), SwapPattern::V3H4).unwrap();
            let want = apply_kraus(&swap_oracle(v), &input);
            let p = want.trace().re;
            assert!((got.success_probability - p).abs() < 1e-12, "v={v}: {} vs {p}", got.success_probability);
            let want = DensityOperator::from_unnormalized(want).unwrap();
            let d = trace_distance(&got.state, &want).unwrap();
            assert!(d <= 1e-9, "v={v}: trace distance {d}");
            let diff = got.state.matrix() * C64::from(got.success_probability) - want.matrix() * C64::from(p);
            assert!(max_abs(&diff) < 1e-12);
        }
    }
}

#[test]
fn ghz_matches_fock_oracle() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..50 {
        let ra = random_density(&mut rng, 4);
        let anc = random_pure(&mut rng, 2);
        let a = SourceSpec::new(ra.clone(), SourceLabel::A).unwrap();
        let input = ra.matrix().kronecker(anc.projector().matrix());
        for v in [0.0, 0.5, 1.0] {
            let got = qpc_ghz(&a, &anc, InterferenceVisibility::new(v).unwrap()).unwrap();
            let want = apply_kraus(&ghz_oracle(v), &input);
            let p = want.trace().re;
            assert!((got.success_probability - p).abs() < 1e-12, "v={v}: {} vs {p}", got.success_probability);
            let d = trace_distance(&got.state, &DensityOperator::from_unnormalized(want).unwrap()).unwrap();
            assert!(d <= 1e-9, "v={v}: trace distance {d}");
        }
    }
}
