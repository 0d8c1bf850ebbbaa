//! Monte Carlo timestamp generation.
//!
//! Pair emissions of both sources are homogeneous Poisson processes. Both
//! photons of a pair share one emission time; the idler's wavepacket center
//! is shifted by a Gaussian offset of FWHM τ_c and every detection adds
//! Gaussian jitter of FWHM τ_j. An A idler and a B idler whose centers lie
//! within a few τ_c of each other are paired and their joint polarization
//! outcome is drawn from the two-photon tables, with the indistinguishable
//! table chosen with probability `v = visibility_from_dt(Δcenter, τ_c)`.

mod config;
mod generate;
mod record;
mod record_io;

pub use config::{AnalyzerMode, Circuit, Generation, GenerationMode, NoiseModel, PhysicsConfig, SourceConfig};
pub use generate::{generate_run, RNG_NAME};
pub use record::{
    ground_truth_report, is_genuine_fourfold, Channel, ChannelTruth, CoincidenceTruth, DetectionEvent,
    GroundTruthSummary, TimestampRecord, Truth, N_CHANNELS,
};
pub use record_io::{load_record, read_record, save_record, write_record, write_record_text};
