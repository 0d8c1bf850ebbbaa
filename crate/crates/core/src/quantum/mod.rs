//! Dense linear algebra on one to three polarization qubits.
//!
//! # Basis ordering
//!
//! This is the only place the convention is defined; everything else in the
//! crate relies on it.
//!
//! * A single qubit is `H = 0`, `V = 1`.
//! * For `n` qubits the computational index is the binary number formed by
//!   the qubit values with qubit 0 (the leftmost mode, e.g. mode 1) as the
//!   most significant bit. `|HV⟩` is index 1, `|VH⟩` is index 2 and
//!   `|VVV⟩` is index 7.
//! * Tensor products put the left operand's qubits first (most significant).

mod canonical;
mod metrics;
mod state;
mod text;

pub use canonical::{canonical_state, polarization, CanonicalState, Polarization};
pub use metrics::{
    concurrence_eof, entanglement_report, fidelity, phase_max_fidelity, trace_distance,
    witness_value, EntanglementReport, PhaseFamily, PhaseMaximum,
};
pub use state::{tensor, DensityOperator, Kron, StateVector};
pub use text::{parse_density_operator, write_density_operator};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on Hermiticity and unit trace of a density operator.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above `-EIGEN_CLAMP` are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-8;
/// Tolerance on the norm of a state vector.
pub const NORM_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn n_qubits_of(dim: usize) -> Option<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}
