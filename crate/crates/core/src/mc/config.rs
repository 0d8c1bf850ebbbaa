use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optics::{apply_local_phase, AnalyzerSet, Element};
use crate::quantum::{
    canonical_state, CMatrix, polarization, tensor, CanonicalState, DensityOperator, Polarization, StateVector,
};
use crate::tomography::MeasurementSetting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Circuit {
    /// Half beamsplitter on modes 3, 4; tomography of modes 1, 2.
    Swap,
    /// Polarizing beamsplitter parity check; tomography of modes 1, 3′, 4′.
    Ghz,
}

impl Circuit {
    pub fn element(self) -> Element {
        match self {
            Circuit::Swap => Element::HalfBeamSplitter,
            Circuit::Ghz => Element::PolarizingBeamSplitter,
        }
    }

    pub fn analyzed_modes(self) -> usize {
        match self {
            Circuit::Swap => 2,
            Circuit::Ghz => 3,
        }
    }

    pub fn analyzers(self, setting: Option<&MeasurementSetting>) -> AnalyzerSet {
        let p = |i: usize| setting.map(|s| s.projectors[i]);
        match self {
            Circuit::Swap => AnalyzerSet {
                mode1: p(0),
                mode2: p(1),
                out3: Some(Polarization::V),
                out4: Some(Polarization::H),
            },
            Circuit::Ghz => AnalyzerSet { mode1: p(0), mode2: None, out3: p(1), out4: p(2) },
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Circuit::Swap => "swap",
            Circuit::Ghz => "ghz",
        })
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swap" => Ok(Circuit::Swap),
            "ghz" => Ok(Circuit::Ghz),
            _ => Err(Error::Config(format!("unknown circuit `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzerMode {
    /// Cycle through all 6ⁿ settings in equal sequential blocks.
    #[default]
    Tomography,
    /// No tomography analyzers; the circuit's own polarizers stay.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Every detection of the run.
    #[default]
    Full,
    /// Only D1 starts that complete a four-fold at `max_window_ps`, with the
    /// stop events inside that window.
    Conditioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generation {
    #[serde(default)]
    pub mode: GenerationMode,
    #[serde(default = "default_max_window")]
    pub max_window_ps: f64,
}

fn default_max_window() -> f64 {
    1200.0
}

impl Default for Generation {
    fn default() -> Self {
        Self { mode: GenerationMode::Full, max_window_ps: default_max_window() }
    }
}

/// Two-qubit state of a pair source, ordered (signal, idler).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// A two-qubit canonical name (`phi_plus`, `psi_minus`, ...) or a product
    /// of two polarization letters such as `vd`.
    pub state: String,
    /// Fidelity to the named state after mixing with `noise`; absent means pure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Phase `diag(1, e^{iθ})` applied to the signal photon.
    #[serde(default)]
    pub phase_rad: f64,
}

/// What the state is mixed with to lower its fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// The maximally mixed state.
    #[default]
    White,
    /// The state's own H/V-basis diagonal (loss of coherence only).
    Dephasing,
}

impl SourceConfig {
    pub fn pure(state: &str) -> Self {
        Self { state: state.into(), fidelity: None, noise: NoiseModel::White, phase_rad: 0.0 }
    }

    fn target(&self) -> Result<StateVector> {
        if let Ok(name) = CanonicalState::from_str(&self.state) {
            let v = canonical_state(name)?;
            if v.dim() != 4 {
                return Err(Error::Config(format!("source state `{}` is not a two-photon state", self.state)));
            }
            return Ok(v);
        }
        let letters: Vec<Polarization> = self.state.chars().filter_map(Polarization::from_symbol).collect();
        match letters.as_slice() {
            [a, b] if self.state.len() == 2 => Ok(tensor(&polarization(*a), &polarization(*b))),
            _ => Err(Error::Config(format!("unknown source state `{}`", self.state))),
        }
    }

    pub fn density(&self) -> Result<DensityOperator> {
        let pure = self.target()?.projector();
        let Some(f) = self.fidelity else {
            return self.with_phase(pure);
        };
        let noise = match self.noise {
            NoiseModel::White => DensityOperator::maximally_mixed(2),
            NoiseModel::Dephasing => {
                let diag = CMatrix::from_diagonal(&pure.matrix().diagonal());
                DensityOperator::new(diag)?
            }
        };
        // Fidelity of the noise itself to the target.
        let floor = (0..4).map(|i| (pure.entry(i, i) * noise.entry(i, i)).re).sum::<f64>();
        if !(f <= 1.0 && f >= floor && floor < 1.0) {
            return Err(Error::Config(format!(
                "source fidelity {f} unreachable with {:?} noise (floor {floor})",
                self.noise
            )));
        }
        let rho = pure.mix((f - floor) / (1.0 - floor), &noise)?;
        self.with_phase(rho)
    }

    fn with_phase(&self, rho: DensityOperator) -> Result<DensityOperator> {
        if !self.phase_rad.is_finite() {
            return Err(Error::Config("source phase must be finite".into()));
        }
        apply_local_phase(&rho, 0, self.phase_rad)
    }
}

/// Physical parameters of one simulated run. Times in ps, rates in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub pair_rate_a_hz: f64,
    pub pair_rate_b_hz: f64,
    /// Detection efficiency of D1..D4, including all losses on the way.
    pub efficiency: [f64; 4],
    /// Timing jitter FWHM of every detector.
    pub tau_j_ps: f64,
    /// Coherence time FWHM of the filtered idler photons.
    pub tau_c_ps: f64,
    #[serde(default)]
    pub stray_rate_hz: [f64; 4],
    #[serde(default)]
    pub dark_rate_hz: [f64; 4],
    #[serde(default)]
    pub dead_time_ps: i64,
    pub duration_s: f64,
    pub seed: u64,
    #[serde(default)]
    pub analyzers: AnalyzerMode,
    pub source_a: SourceConfig,
    pub source_b: SourceConfig,
    #[serde(default)]
    pub generation: Generation,
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let nonneg = |name: &str, x: f64| -> Result<()> {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite and non-negative, got {x}")))
            }
        };
        nonneg("pair_rate_a_hz", self.pair_rate_a_hz)?;
        nonneg("pair_rate_b_hz", self.pair_rate_b_hz)?;
        nonneg("tau_j_ps", self.tau_j_ps)?;
        for i in 0..4 {
            nonneg("stray_rate_hz", self.stray_rate_hz[i])?;
            nonneg("dark_rate_hz", self.dark_rate_hz[i])?;
            if !(0.0..=1.0).contains(&self.efficiency[i]) {
                return bad(format!("efficiency of D{} must lie in [0, 1]", i + 1));
            }
        }
        if !(self.tau_c_ps.is_finite() && self.tau_c_ps > 0.0) {
            return bad(format!("tau_c_ps must be positive, got {}", self.tau_c_ps));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if self.duration_s * 1e12 >= i64::MAX as f64 / 4.0 {
            return bad("duration_s is too long".into());
        }
        if self.dead_time_ps < 0 {
            return bad("dead_time_ps must be non-negative".into());
        }
        if self.generation.mode == GenerationMode::Conditioned
            && !(self.generation.max_window_ps.is_finite() && self.generation.max_window_ps >= 1.0)
        {
            return bad("generation.max_window_ps must be at least 1 ps".into());
        }
        self.source_a.density()?;
        self.source_b.density()?;
        Ok(())
    }

    pub fn duration_ps(&self) -> i64 {
        (self.duration_s * 1e12).round() as i64
    }

    /// sha256 of the canonical TOML of this configuration and circuit.
    pub fn digest(&self, circuit: Circuit) -> [u8; 32] {
        let body = toml::to_string(self).expect("physics config serializes");
        let mut h = Sha256::new();
        h.update(format!("circuit = \"{circuit}\"\n").as_bytes());
        h.update(body.as_bytes());
        h.finalize().into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::fidelity;

    #[test]
    fn source_states() {
        let phi = canonical_state(CanonicalState::PhiPlus).unwrap();
        for noise in [NoiseModel::White, NoiseModel::Dephasing] {
            let s = SourceConfig { fidelity: Some(0.963), noise, ..SourceConfig::pure("phi_plus") };
            let rho = s.density().unwrap();
            assert!((fidelity(&rho, &phi).unwrap() - 0.963).abs() < 1e-12);
            if noise == NoiseModel::Dephasing {
                assert!(rho.entry(1, 1).norm() < 1e-15);
            }
        }
        let s = SourceConfig { fidelity: Some(0.4), noise: NoiseModel::Dephasing, ..SourceConfig::pure("phi_plus") };
        assert!(s.density().is_err());
        let vd = SourceConfig::pure("vd").density().unwrap();
        let expect = tensor(&polarization(Polarization::V), &polarization(Polarization::D));
        assert!((fidelity(&vd, &expect).unwrap() - 1.0).abs() < 1e-12);
        assert!(SourceConfig::pure("ghz").density().is_err());
        assert!(SourceConfig::pure("xyz").density().is_err());
        assert!(SourceConfig { fidelity: Some(0.1), ..SourceConfig::pure("phi_plus") }.density().is_err());
    }
}
