//! Experiment configuration files and the shipped presets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mc::{Circuit, PhysicsConfig};
use crate::tdc::StopPolicy;
use crate::tomography::{MleOptions, MIN_BOOTSTRAP};

pub const PRESETS: [(&str, &str); 2] = [
    ("paper-swap", include_str!("../presets/paper-swap.toml")),
    ("paper-ghz", include_str!("../presets/paper-ghz.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Coincidence windows, total width in ps, ascending.
    pub windows_ps: Vec<i64>,
    #[serde(default)]
    pub policy: StopPolicy,
    /// Windows with fewer four-folds skip tomography.
    #[serde(default = "default_min_counts")]
    pub min_counts: u64,
    /// Window grid of the rate/fidelity sweep.
    #[serde(default = "default_sweep_grid")]
    pub sweep_grid_ps: Vec<i64>,
}

fn default_min_counts() -> u64 {
    10
}

fn default_sweep_grid() -> Vec<i64> {
    vec![40, 60, 80, 100, 120, 150, 230, 300, 400, 560, 700, 850, 1000, 1200]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Poisson bootstrap resamples; 0 disables error bars.
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_epsilon() -> f64 {
    MleOptions::default().epsilon
}
fn default_tol() -> f64 {
    MleOptions::default().tol
}
fn default_max_iter() -> usize {
    MleOptions::default().max_iter
}
fn default_bootstrap() -> usize {
    200
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self { epsilon: default_epsilon(), tol: default_tol(), max_iter: default_max_iter(), bootstrap: default_bootstrap() }
    }
}

impl TomographyConfig {
    pub fn mle(&self) -> MleOptions {
        MleOptions { epsilon: self.epsilon, tol: self.tol, max_iter: self.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub circuit: Circuit,
    pub physics: PhysicsConfig,
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
        Self::parse(text)
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        let w = &self.analysis.windows_ps;
        if w.is_empty() || w.iter().any(|&x| x <= 0) || w.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Config("analysis.windows_ps must be positive and strictly ascending".into()));
        }
        let g = &self.analysis.sweep_grid_ps;
        if g.iter().any(|&x| x <= 0) || g.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Config("analysis.sweep_grid_ps must be positive and strictly ascending".into()));
        }
        let t = &self.tomography;
        if !(t.epsilon > 0.0 && t.epsilon <= 1.0) {
            return Err(Error::Config(format!("tomography.epsilon must lie in (0, 1], got {}", t.epsilon)));
        }
        if !(t.tol >= 0.0) || t.max_iter == 0 {
            return Err(Error::Config("tomography.tol must be non-negative and max_iter positive".into()));
        }
        if t.bootstrap != 0 && t.bootstrap < MIN_BOOTSTRAP {
            return Err(Error::Config(format!("tomography.bootstrap must be 0 or at least {MIN_BOOTSTRAP}")));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    /// Hex sha256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_round_trip() {
        for (name, _) in PRESETS {
            let cfg = ExperimentConfig::preset(name).unwrap();
            assert_eq!(cfg.preset.as_deref(), Some(name));
            let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
            assert_eq!(again, cfg);
            assert_eq!(again.digest(), cfg.digest());
        }
        assert!(ExperimentConfig::preset("nope").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ExperimentConfig::preset("paper-swap").unwrap();
        cfg.physics.duration_s = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let text = ExperimentConfig::preset("paper-swap").unwrap().to_toml().replace("circuit = \"swap\"", "circuit = \"teleport\"");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))));
    }
}
