//! Post-selected output states of the swapping and parity-check circuits.
//!
//! Mode labels follow the experiment: source A emits into modes 1 (signal)
//! and 4 (idler), source B into modes 2 and 3. Modes 3 and 4 meet on the
//! interference element whose outputs are 3′ and 4′.
//!
//! Partial distinguishability of the two idler photons enters through the
//! visibility `v`: every two-photon probability is `v·P_same + (1−v)·P_diff`,
//! where `P_same` treats the photons as occupying one temporal mode and
//! `P_diff` as occupying orthogonal ones.

mod transfer;

pub use transfer::{
    Analyzer, AnalyzerSet, DetectedPhoton, Element, JointOutcome, PhotonFate, SingleOutcome,
    TransferTables,
};

use std::f64::consts::LN_2;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{tensor, CMatrix, DensityOperator, StateVector, C64};

/// Overlap of the two interfering wavepackets, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct InterferenceVisibility(f64);

impl InterferenceVisibility {
    pub const PERFECT: Self = Self(1.0);
    pub const NONE: Self = Self(0.0);

    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("visibility {v} outside [0, 1]")));
        }
        Ok(Self(v))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Squared overlap of two Gaussian wavepackets of FWHM `tau_c` whose centers
/// differ by `dt`: `exp(−4 ln2 · dt² / (2 τ_c²))`.
pub fn visibility_from_dt(dt_ps: f64, tau_c_ps: f64) -> Result<InterferenceVisibility> {
    if !(tau_c_ps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coherence time {tau_c_ps} must be positive"
        )));
    }
    Ok(InterferenceVisibility(
        (-4.0 * LN_2 * dt_ps * dt_ps / (2.0 * tau_c_ps * tau_c_ps)).exp(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceLabel {
    A,
    B,
}

/// Two-qubit state of one pair source, ordered (signal, idler).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub state: DensityOperator,
    pub label: SourceLabel,
}

impl SourceSpec {
    pub fn new(state: DensityOperator, label: SourceLabel) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: state.dim(),
            });
        }
        Ok(Self { state, label })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedOutcome {
    pub state: DensityOperator,
    pub success_probability: f64,
}

/// Which orthogonal-polarization coincidence heralds the singlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SwapPattern {
    /// V-polarized photon at 3′ and H-polarized photon at 4′.
    #[default]
    V3H4,
    /// H-polarized photon at 3′ and V-polarized photon at 4′.
    H3V4,
}

fn bra(entries: [(usize, f64); 2]) -> CMatrix {
    let mut k = CMatrix::zeros(1, 4);
    for (idx, val) in entries {
        k[(0, idx)] += C64::from(val);
    }
    k
}

/// Sandwich `ρ` with `I ⊗ k` where `k` acts on the trailing two qubits.
fn apply_trailing(rho: &CMatrix, lead_dim: usize, k: &CMatrix) -> CMatrix {
    let full = CMatrix::identity(lead_dim, lead_dim).kronecker(k);
    &full * rho * full.adjoint()
}

fn heralded(
    rho: &CMatrix,
    lead_dim: usize,
    coherent: &CMatrix,
    incoherent: &[CMatrix],
    vis: InterferenceVisibility,
) -> Result<HeraldedOutcome> {
    let v = vis.value();
    let same = apply_trailing(rho, lead_dim, coherent);
    let mut diff = CMatrix::zeros(same.nrows(), same.ncols());
    for k in incoherent {
        diff += apply_trailing(rho, lead_dim, k);
    }
    let out = same * C64::from(v) + diff * C64::from(1.0 - v);
    let p = out.trace().re;
    if p <= 1e-15 {
        return Err(Error::InvalidState(
            "post-selection has zero success probability".into(),
        ));
    }
    Ok(HeraldedOutcome {
        state: DensityOperator::from_unnormalized(out)?,
        success_probability: p,
    })
}

/// Entanglement swapping with a half beamsplitter on modes 3 and 4 and an
/// orthogonal-polarization coincidence on 3′ and 4′. The result lives on
/// modes (1, 2).
pub fn bsm_swap(
    src_a: &SourceSpec,
    src_b: &SourceSpec,
    vis: InterferenceVisibility,
    pattern: SwapPattern,
) -> Result<HeraldedOutcome> {
    // (1,4) ⊗ (2,3) reordered to (1,2,3,4)
    let rho = tensor(&src_a.state, &src_b.state).permute_qubits(&[0, 2, 3, 1])?;
    // Input basis on (3,4): HV = 1, VH = 2. A photon entering at 3 keeps its
    // sign on either output; one entering at 4 picks up −1 towards 4′.
    let (coherent, direct, crossed) = match pattern {
        SwapPattern::V3H4 => (
            bra([(1, 0.5), (2, -0.5)]),
            bra([(2, 0.5), (1, 0.0)]),
            bra([(1, 0.5), (2, 0.0)]),
        ),
        SwapPattern::H3V4 => (
            bra([(1, -0.5), (2, 0.5)]),
            bra([(1, 0.5), (2, 0.0)]),
            bra([(2, 0.5), (1, 0.0)]),
        ),
    };
    heralded(rho.matrix(), 4, &coherent, &[direct, crossed], vis)
}

/// Parity check of source A's idler (mode 4) with a single-photon ancilla in
/// mode 3 on a polarizing beamsplitter, post-selecting one photon in each of
/// 3′ and 4′. The result lives on modes (1, 3′, 4′).
pub fn qpc_ghz(
    src_a: &SourceSpec,
    ancilla: &StateVector,
    vis: InterferenceVisibility,
) -> Result<HeraldedOutcome> {
    if ancilla.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ancilla.dim(),
        });
    }
    // (1,4) ⊗ (3) reordered to (1,3,4)
    let rho = tensor(&src_a.state, &ancilla.projector()).permute_qubits(&[0, 2, 1])?;
    let proj = |idx: usize| {
        let mut k = CMatrix::zeros(4, 4);
        k[(idx, idx)] = C64::from(1.0);
        k
    };
    let coherent = proj(0) + proj(3);
    heralded(rho.matrix(), 2, &coherent, &[proj(0), proj(3)], vis)
}

/// Conjugation by `diag(1, e^{iθ})` on one qubit.
pub fn apply_local_phase(state: &DensityOperator, mode: usize, theta: f64) -> Result<DensityOperator> {
    let u = Matrix2::new(
        C64::from(1.0),
        C64::from(0.0),
        C64::from(0.0),
        C64::from_polar(1.0, theta),
    );
    state.apply_local_unitary(mode, &u)
}
