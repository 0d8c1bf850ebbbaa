//! Brute-force propagation of two photons through the interfering element in
//! a Fock basis with explicit time-bin modes.

use asyncswap::quantum::{CMatrix, DensityOperator, StateVector, C64};
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::StandardNormal;

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-photon mode index: output port (0 = 3′, 1 = 4′), polarization, time bin.
fn mode(port: usize, pol: usize, t: usize) -> usize {
    port * 4 + pol * 2 + t
}

#[derive(Clone, Copy)]
enum Optic {
    Hbs,
    Pbs,
}

/// Output amplitudes of one photon entering on input `port_in` (3 or 4) with
/// polarization `pol` and the given time-bin amplitudes.
fn propagate(optic: Optic, port_in: usize, pol: usize, time: [f64; 2]) -> [C64; 8] {
    let mut out = [C64::new(0.0, 0.0); 8];
    let ports: Vec<(usize, f64)> = match optic {
        Optic::Hbs => match port_in {
            3 => vec![(0, S), (1, S)],
            _ => vec![(0, S), (1, -S)],
        },
        // H is transmitted (3 → 3′, 4 → 4′), V reflected.
        Optic::Pbs => match (port_in, pol) {
            (3, 0) | (4, 1) => vec![(0, 1.0)],
            _ => vec![(1, 1.0)],
        },
    };
    for (port, amp) in ports {
        for t in 0..2 {
            out[mode(port, pol, t)] += C64::from(amp * time[t]);
        }
    }
    out
}

/// Amplitude of one photon in `x` and one in `y` (x ≠ y) for two photons with
/// single-particle amplitudes `u` and `w`.
fn pair_amplitude(u: &[C64; 8], w: &[C64; 8], x: usize, y: usize) -> C64 {
    u[x] * w[y] + u[y] * w[x]
}

pub fn apply_kraus(ks: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(ks[0].nrows(), ks[0].nrows());
    for k in ks {
        out += k * rho * k.adjoint();
    }
    out
}

/// Kraus maps from (a1, a4) ⊗ (b2, b3) to the signal pair (1, 2), one per
/// pair of detection time bins, for a V photon at 3′ and an H photon at 4′.
pub fn swap_oracle(v: f64) -> Vec<CMatrix> {
    let b_time = [v.sqrt(), (1.0 - v).sqrt()];
    let mut ks = Vec::new();
    for t3 in 0..2 {
        for t4 in 0..2 {
            let mut k = CMatrix::zeros(4, 16);
            for a1 in 0..2 {
                for a4 in 0..2 {
                    for b2 in 0..2 {
                        for b3 in 0..2 {
                            let u = propagate(Optic::Hbs, 4, a4, [1.0, 0.0]);
                            let w = propagate(Optic::Hbs, 3, b3, b_time);
                            let amp = pair_amplitude(&u, &w, mode(0, 1, t3), mode(1, 0, t4));
                            k[(a1 * 2 + b2, (a1 * 2 + a4) * 4 + b2 * 2 + b3)] += amp;
                        }
                    }
                }
            }
            ks.push(k);
        }
    }
    ks
}

/// Kraus maps from (a1, a4) ⊗ (ancilla in 3) to (1, 3′, 4′) with one photon in
/// each output port.
pub fn ghz_oracle(v: f64) -> Vec<CMatrix> {
    let b_time = [v.sqrt(), (1.0 - v).sqrt()];
    let mut ks = Vec::new();
    for t3 in 0..2 {
        for t4 in 0..2 {
            let mut k = CMatrix::zeros(8, 8);
            for a1 in 0..2 {
                for a4 in 0..2 {
                    for b3 in 0..2 {
                        let u = propagate(Optic::Pbs, 4, a4, [1.0, 0.0]);
                        let w = propagate(Optic::Pbs, 3, b3, b_time);
                        for p3 in 0..2 {
                            for p4 in 0..2 {
                                let amp = pair_amplitude(&u, &w, mode(0, p3, t3), mode(1, p4, t4));
                                k[(a1 * 4 + p3 * 2 + p4, (a1 * 2 + a4) * 2 + b3)] += amp;
                            }
                        }
                    }
                }
            }
            ks.push(k);
        }
    }
    ks
}

pub fn random_density(rng: &mut StdRng, dim: usize) -> DensityOperator {
    let g = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    DensityOperator::from_unnormalized(&g * g.adjoint()).unwrap()
}

pub fn random_pure(rng: &mut StdRng, dim: usize) -> StateVector {
    let amps = (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    StateVector::normalized(amps).unwrap()
}
