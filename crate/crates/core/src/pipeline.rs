//! Record → four-folds → counts → reconstruction → metrics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::{hex, TomographyConfig};
use crate::error::{Error, Result};
use crate::mc::{Channel, Circuit, TimestampRecord};
use crate::quantum::{entanglement_report, write_density_operator, EntanglementReport};
use crate::tdc::{
    classify_fourfolds, estimate_tau_c, fit_gaussian, start_stop_histogram, sweep_windows, FourfoldEvent,
    StopPolicy, WindowResult,
};
use crate::tomography::{bootstrap_errors, mle_reconstruct, CountTable, MetricStd};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Log-log slopes use grid points at or below this window...
pub const SMALL_REGIME_MAX_PS: i64 = 150;
/// ...and at or above this one.
pub const LARGE_REGIME_MIN_PS: i64 = 400;
/// Half range of the start-stop histogram used for τ_c.
pub const TAU_C_RANGE_PS: i64 = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    pub metrics: EntanglementReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<MetricStd>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Reconstructed state in the density-operator text format.
    pub rho: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub tau_w_ps: i64,
    pub fourfolds: u64,
    pub rate_per_hour: f64,
    pub genuine: u64,
    pub accidental: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tomography: Option<TomographyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip)]
    pub counts: Option<CountTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_c_ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_fwhm_ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config_digest: String,
    pub record_digest: String,
    pub circuit: String,
    pub duration_s: f64,
    pub tau_c: TauCReport,
    pub windows: Vec<WindowReport>,
}

impl RunReport {
    /// True when some window had to skip tomography.
    pub fn degraded(&self) -> bool {
        self.windows.iter().any(|w| w.skipped.is_some())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    /// `tau_w_ps,rate_per_hour,F,F_prime,theta_star,EOF_or_witness,...` with
    /// empty cells where tomography was skipped.
    pub fn table(&self) -> String {
        let mut out = String::from(
            "tau_w_ps,fourfolds,rate_per_hour,F,F_prime,theta_star,EOF_or_witness,F_std,F_prime_std,theta_star_std,EOF_or_witness_std\n",
        );
        for w in &self.windows {
            let _ = write!(out, "{},{},{:.6}", w.tau_w_ps, w.fourfolds, w.rate_per_hour);
            match &w.tomography {
                Some(t) => {
                    let m = &t.metrics;
                    let third = m.eof.or(m.witness_value).unwrap_or(f64::NAN);
                    let _ = write!(out, ",{:.6},{:.6},{:.6},{:.6}", m.fidelity, m.phase_max_fidelity, m.theta_star, third);
                    match &t.std {
                        Some(s) => {
                            let third = s.eof.or(s.witness_value).unwrap_or(f64::NAN);
                            let _ = writeln!(out, ",{:.6},{:.6},{:.6},{:.6}", s.fidelity, s.phase_max_fidelity, s.theta_star, third);
                        }
                        None => out.push_str(",,,,\n"),
                    }
                }
                None => out.push_str(",,,,,,,,\n"),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub policy: StopPolicy,
    pub min_counts: u64,
    pub tomography: TomographyConfig,
    pub seed: u64,
    /// Jitter used to deconvolve τ_c.
    pub tau_j_ps: f64,
}

/// Tomography layout stored in a record's metadata.
struct Layout {
    circuit: Circuit,
    n_modes: usize,
    n_settings: usize,
    block_ps: i64,
}

fn layout(record: &TimestampRecord) -> Result<Layout> {
    let circuit: Circuit = record
        .meta_value("circuit")
        .ok_or_else(|| Error::CorruptRecord("metadata lacks `circuit`".into()))?
        .parse()
        .map_err(|_| Error::CorruptRecord("bad `circuit` metadata".into()))?;
    let n_settings: usize = record.meta_parse("n_settings").unwrap_or(1);
    let n_modes: usize = record.meta_parse("n_modes").unwrap_or(0);
    let block_ps: i64 = record.meta_parse("block_ps").unwrap_or(record.duration_ps.max(1));
    if n_settings > 1 && (6usize.pow(n_modes as u32) != n_settings || block_ps <= 0) {
        return Err(Error::CorruptRecord("inconsistent tomography metadata".into()));
    }
    Ok(Layout { circuit, n_modes, n_settings, block_ps })
}

fn count_table(events: &[FourfoldEvent], lay: &Layout) -> Result<CountTable> {
    let mut counts = vec![0u64; lay.n_settings];
    for e in events {
        let k = ((e.start / lay.block_ps) as usize).min(lay.n_settings - 1);
        counts[k] += 1;
    }
    CountTable::from_counts(lay.n_modes, counts)
}

/// MLE state, metrics and (if enabled) bootstrap errors for one count table.
pub fn tomography_report(counts: &CountTable, cfg: &TomographyConfig, seed: u64) -> Result<TomographyReport> {
    let mle = cfg.mle();
    let r = mle_reconstruct(counts, &mle)?;
    let metrics = entanglement_report(&r.rho)?;
    let std = match cfg.bootstrap {
        0 => None,
        n => Some(bootstrap_errors(counts, &r.rho, n, &mle, seed)?),
    };
    Ok(TomographyReport {
        metrics,
        std,
        iterations: r.iterations,
        converged: r.converged,
        log_likelihood: r.log_likelihood,
        rho: write_density_operator(&r.rho),
    })
}

fn window_report(record: &TimestampRecord, lay: &Layout, w: &WindowResult, opts: &AnalysisOptions) -> Result<WindowReport> {
    let hours = record.duration_ps as f64 * 1e-12 / 3600.0;
    let truth = classify_fourfolds(record, &w.events);
    let mut report = WindowReport {
        tau_w_ps: w.tau_w,
        fourfolds: w.count() as u64,
        rate_per_hour: w.count() as f64 / hours,
        genuine: truth.genuine,
        accidental: truth.accidental,
        tomography: None,
        skipped: None,
        counts: None,
    };
    if lay.n_settings <= 1 {
        report.skipped = Some("record was taken without tomography analyzers".into());
        return Ok(report);
    }
    let mut counts = count_table(&w.events, lay)?;
    counts.tau_w_ps = Some(w.tau_w);
    counts.duration_s = Some(record.duration_ps as f64 * 1e-12);
    counts.digest = Some(hex(&record.digest));
    if counts.total() < opts.min_counts {
        report.skipped = Some(format!("{} four-folds, need at least {}", counts.total(), opts.min_counts));
    } else {
        match tomography_report(&counts, &opts.tomography, opts.seed) {
            Ok(t) => report.tomography = Some(t),
            Err(e @ (Error::InsufficientCounts(_) | Error::NotEstimable(_))) => report.skipped = Some(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    report.counts = Some(counts);
    Ok(report)
}

/// τ_c from the D1–D3 start-stop histogram of a full record.
pub fn tau_c_report(record: &TimestampRecord, tau_j_ps: f64) -> TauCReport {
    if record.meta_value("mode") == Some("conditioned") {
        return TauCReport {
            tau_c_ps: None,
            fitted_fwhm_ps: None,
            reason: Some("conditioned records keep only four-fold clusters".into()),
        };
    }
    let fit = start_stop_histogram(record, Channel::D1, Channel::D3, 1, TAU_C_RANGE_PS).and_then(|h| {
        let fwhm = fit_gaussian(&h)?.fwhm;
        Ok((fwhm, estimate_tau_c(&h, tau_j_ps)?))
    });
    match fit {
        Ok((fwhm, tau_c)) => TauCReport { tau_c_ps: Some(tau_c), fitted_fwhm_ps: Some(fwhm), reason: None },
        Err(e) => TauCReport { tau_c_ps: None, fitted_fwhm_ps: None, reason: Some(e.to_string()) },
    }
}

/// Full analysis of one record at the given windows.
pub fn analyze(record: &TimestampRecord, windows: &[i64], config_digest: &str, opts: &AnalysisOptions) -> Result<RunReport> {
    let lay = layout(record)?;
    let sweep = sweep_windows(record, windows, opts.policy)?;
    let windows = sweep.iter().map(|w| window_report(record, &lay, w, opts)).collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        version: VERSION.into(),
        config_digest: config_digest.into(),
        record_digest: hex(&record.digest),
        circuit: lay.circuit.to_string(),
        duration_s: record.duration_ps as f64 * 1e-12,
        tau_c: tau_c_report(record, opts.tau_j_ps),
        windows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau_w_ps: i64,
    pub fourfolds: u64,
    pub rate_per_hour: f64,
    pub f_prime: Option<f64>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub config_digest: String,
    pub rows: Vec<SweepRow>,
    pub small_window_slope: Option<f64>,
    pub large_window_slope: Option<f64>,
    pub warnings: Vec<String>,
}

impl SweepReport {
    pub fn table(&self) -> String {
        let mut out = String::from("tau_w_ps,fourfolds,rate_per_hour,F,F_prime\n");
        let cell = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{:.6},{},{}", r.tau_w_ps, r.fourfolds, r.rate_per_hour, cell(r.fidelity), cell(r.f_prime));
        }
        out
    }
}

/// Least-squares slope of `ln y` against `ln x`; needs two distinct points
/// with positive `y`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Rate and fidelity against window width, with log-log slopes of the rate
/// in the small- and large-window regimes. Error bars are not computed.
pub fn window_sweep(record: &TimestampRecord, grid: &[i64], config_digest: &str, opts: &AnalysisOptions) -> Result<SweepReport> {
    let mut quick = *opts;
    quick.tomography.bootstrap = 0;
    let report = analyze(record, grid, config_digest, &quick)?;
    let rows: Vec<SweepRow> = report
        .windows
        .iter()
        .map(|w| SweepRow {
            tau_w_ps: w.tau_w_ps,
            fourfolds: w.fourfolds,
            rate_per_hour: w.rate_per_hour,
            f_prime: w.tomography.as_ref().map(|t| t.metrics.phase_max_fidelity),
            fidelity: w.tomography.as_ref().map(|t| t.metrics.fidelity),
        })
        .collect();
    let regime = |keep: &dyn Fn(i64) -> bool| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| keep(r.tau_w_ps)).map(|r| (r.tau_w_ps as f64, r.rate_per_hour)).collect()
    };
    let small = regime(&|w| w <= SMALL_REGIME_MAX_PS);
    let large = regime(&|w| w >= LARGE_REGIME_MIN_PS);
    let mut warnings = Vec::new();
    let small_window_slope = loglog_slope(&small);
    let large_window_slope = loglog_slope(&large);
    if small_window_slope.is_none() || large_window_slope.is_none() {
        warnings.push(format!(
            "grid too narrow for a two-regime fit: need two windows with counts at or below {SMALL_REGIME_MAX_PS} ps and two at or above {LARGE_REGIME_MIN_PS} ps; slopes omitted"
        ));
    }
    if let Some(w) = record.meta_parse::<i64>("w_max_ps") {
        if grid.iter().any(|&g| g > w) {
            warnings.push(format!("record was generated for windows up to {w} ps; larger windows undercount"));
        }
    }
    Ok(SweepReport {
        version: VERSION.into(),
        config_digest: config_digest.into(),
        rows,
        small_window_slope: small_window_slope.filter(|_| large_window_slope.is_some()),
        large_window_slope: large_window_slope.filter(|_| small_window_slope.is_some()),
        warnings,
    })
}
