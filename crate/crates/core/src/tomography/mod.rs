//! Projective polarization tomography.
//!
//! Every analyzed mode is measured in the H, V, D, A, R, L states, giving
//! 6ⁿ product settings. Their projectors sum to `3ⁿ·I`.

mod counts;
mod reconstruct;
mod settings;

pub use counts::{accumulate, CountTable};
pub use reconstruct::{
    bootstrap_errors, bootstrap_with, clip_to_physical, linear_inversion, log_likelihood_of, mle_from,
    mle_reconstruct, poisson_resample, MetricStd, MleOptions, ReconstructionResult, MIN_BOOTSTRAP,
};
pub use settings::{settings, MeasurementSetting};
