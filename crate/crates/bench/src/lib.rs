//! Fixtures shared by the benchmarks.

use asyncswap::config::ExperimentConfig;
use asyncswap::mc::{generate_run, AnalyzerMode, GenerationMode, TimestampRecord};

/// Every detection of a short swap run at the calibrated rates, with stray
/// light on all four detectors.
pub fn dense_record(seconds: f64) -> TimestampRecord {
    let mut cfg = ExperimentConfig::preset("paper-swap").expect("preset parses");
    let p = &mut cfg.physics;
    p.duration_s = seconds;
    p.generation.mode = GenerationMode::Full;
    p.analyzers = AnalyzerMode::Open;
    p.stray_rate_hz = [2.0e4; 4];
    p.dark_rate_hz = [100.0; 4];
    generate_run(p, cfg.circuit).expect("generation succeeds")
}
