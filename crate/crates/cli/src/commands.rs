use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use asyncswap::config::{hex, ExperimentConfig, TomographyConfig};
use asyncswap::mc::{generate_run, ground_truth_report, load_record, write_record, Channel, GroundTruthSummary};
use asyncswap::pipeline::{self, AnalysisOptions, TomographyReport, VERSION, TAU_C_RANGE_PS};
use asyncswap::quantum::{entanglement_report, parse_density_operator, EntanglementReport};
use asyncswap::tdc::{estimate_tau_c, fit_gaussian, start_stop_histogram, StartStopHistogram};
use asyncswap::tomography::CountTable;
use asyncswap::{Error, Result};

use crate::rundir::RunDir;
use crate::{ConfigArgs, Outcome};

const CONFIG_FILE: &str = "config.toml";

/// `--config`, then `--preset`, then a `config.toml` next to the input.
fn resolve(args: &ConfigArgs, near: Option<&Path>) -> Result<ExperimentConfig> {
    if let Some(p) = &args.config {
        return ExperimentConfig::load(p);
    }
    if let Some(name) = &args.preset {
        return ExperimentConfig::preset(name);
    }
    if let Some(dir) = near {
        let p = dir.join(CONFIG_FILE);
        if p.is_file() {
            return ExperimentConfig::load(&p);
        }
    }
    Err(Error::Config(format!("no configuration: pass --config or --preset, or keep {CONFIG_FILE} beside the input")))
}

fn parent(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn to_toml<T: Serialize>(v: &T) -> String {
    toml::to_string(v).expect("report serializes")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

#[derive(Serialize)]
struct GroundTruthFile<'a> {
    version: &'a str,
    config_digest: &'a str,
    events: usize,
    summary: GroundTruthSummary,
}

pub fn simulate(args: &ConfigArgs, seed: Option<u64>, out: Option<PathBuf>) -> Result<Outcome> {
    let mut cfg = resolve(args, None)?;
    if let Some(s) = seed {
        cfg.physics.seed = s;
    }
    let digest = cfg.digest();
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let run = RunDir::open(&dir, &digest)?;
    let mut record = generate_run(&cfg.physics, cfg.circuit)?;
    record.meta.insert("config_digest".into(), digest.clone());
    run.write_text(CONFIG_FILE, &cfg.to_toml())?;
    let path = run.write_with("record.tsr", |f| write_record(&record, f))?;
    let truth = GroundTruthFile {
        version: VERSION,
        config_digest: &digest,
        events: record.len(),
        summary: ground_truth_report(&record),
    };
    run.write_text("ground_truth.toml", &to_toml(&truth))?;
    println!("{} events, {} s simulated -> {}", record.len(), cfg.physics.duration_s, path.display());
    Ok(Outcome::Ok)
}

pub fn analyze(
    record_path: &Path,
    args: &ConfigArgs,
    windows: Option<Vec<i64>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let record = load_record(record_path)?;
    let mut cfg = resolve(args, Some(&parent(record_path)))?;
    if let Some(w) = windows {
        cfg.analysis.windows_ps = w;
        cfg.validate()?;
    }
    if record.digest != cfg.physics.digest(cfg.circuit) {
        eprintln!("warning: record was not generated from this configuration");
    }
    let opts = AnalysisOptions {
        policy: cfg.analysis.policy,
        min_counts: cfg.analysis.min_counts,
        tomography: cfg.tomography,
        seed: seed.unwrap_or(cfg.physics.seed),
        tau_j_ps: cfg.physics.tau_j_ps,
    };
    let digest = cfg.digest();
    let report = pipeline::analyze(&record, &cfg.analysis.windows_ps, &digest, &opts)?;

    let run = RunDir::open(&out.unwrap_or_else(|| parent(record_path)), &digest)?;
    run.write_text("report.toml", &report.to_toml())?;
    run.write_text("report.csv", &report.table())?;
    for w in &report.windows {
        if let Some(c) = &w.counts {
            run.write_text(&format!("counts_{}ps.txt", w.tau_w_ps), &c.write_text())?;
        }
        if let Some(t) = &w.tomography {
            run.write_text(&format!("rho_{}ps.txt", w.tau_w_ps), &t.rho)?;
        }
        if let Some(why) = &w.skipped {
            eprintln!("tau_w = {} ps: tomography skipped: {why}", w.tau_w_ps);
        }
    }
    print!("{}", report.table());
    Ok(if report.degraded() { Outcome::Degraded } else { Outcome::Ok })
}

pub fn sweep(record_path: &Path, args: &ConfigArgs, windows: Option<Vec<i64>>, out: Option<PathBuf>) -> Result<Outcome> {
    let record = load_record(record_path)?;
    let mut cfg = resolve(args, Some(&parent(record_path)))?;
    if let Some(w) = windows {
        cfg.analysis.sweep_grid_ps = w;
        cfg.validate()?;
    }
    let opts = AnalysisOptions {
        policy: cfg.analysis.policy,
        min_counts: cfg.analysis.min_counts,
        tomography: cfg.tomography,
        seed: cfg.physics.seed,
        tau_j_ps: cfg.physics.tau_j_ps,
    };
    let digest = cfg.digest();
    let report = pipeline::window_sweep(&record, &cfg.analysis.sweep_grid_ps, &digest, &opts)?;
    let run = RunDir::open(&out.unwrap_or_else(|| parent(record_path)), &digest)?;
    run.write_text("sweep.csv", &report.table())?;
    run.write_text("sweep.toml", &to_toml(&report))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.table());
    let slope = |s: Option<f64>| s.map_or("omitted".to_string(), |v| format!("{v:.3}"));
    println!(
        "slope below {} ps: {}; above {} ps: {}",
        pipeline::SMALL_REGIME_MAX_PS,
        slope(report.small_window_slope),
        pipeline::LARGE_REGIME_MIN_PS,
        slope(report.large_window_slope)
    );
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct TomoFile<'a> {
    version: &'a str,
    config_digest: &'a str,
    counts_sha256: String,
    total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_w_ps: Option<i64>,
    #[serde(flatten)]
    report: &'a TomographyReport,
}

pub fn tomo(path: &Path, args: &ConfigArgs, seed: Option<u64>, out: Option<PathBuf>) -> Result<Outcome> {
    let text = fs::read_to_string(path)?;
    let counts = CountTable::parse_text(&text)?;
    let (tcfg, digest, seed) = if args.config.is_some() || args.preset.is_some() {
        let cfg = resolve(args, None)?;
        (cfg.tomography, cfg.digest(), seed.unwrap_or(cfg.physics.seed))
    } else {
        let t = TomographyConfig::default();
        (t, sha256_hex(to_toml(&t).as_bytes()), seed.unwrap_or(0))
    };
    let report = pipeline::tomography_report(&counts, &tcfg, seed)?;
    let file = TomoFile {
        version: VERSION,
        config_digest: &digest,
        counts_sha256: sha256_hex(text.as_bytes()),
        total: counts.total(),
        tau_w_ps: counts.tau_w_ps,
        report: &report,
    };
    let body = to_toml(&file);
    if let Some(dir) = out {
        let run = RunDir::open(&dir, &digest)?;
        run.write_text("rho.txt", &report.rho)?;
        run.write_text("tomo.toml", &body)?;
    }
    print!("{body}");
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    version: &'a str,
    rho_sha256: String,
    #[serde(flatten)]
    metrics: EntanglementReport,
}

pub fn metrics(path: &Path, out: Option<PathBuf>) -> Result<Outcome> {
    let text = fs::read_to_string(path)?;
    let rho = parse_density_operator(&text)?;
    let file = MetricsFile { version: VERSION, rho_sha256: sha256_hex(text.as_bytes()), metrics: entanglement_report(&rho)? };
    let body = to_toml(&file);
    if let Some(dir) = out {
        RunDir::open(&dir, "none")?.write_text("metrics.toml", &body)?;
    }
    print!("{body}");
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct TauCFile<'a> {
    version: &'a str,
    config_digest: &'a str,
    tau_j_ps: f64,
    histogram_total: u64,
    fitted_fwhm_ps: f64,
    fitted_center_ps: f64,
    background_per_bin: f64,
    tau_c_ps: f64,
}

pub fn tauc(histogram: Option<PathBuf>, record: Option<PathBuf>, args: &ConfigArgs, out: Option<PathBuf>) -> Result<Outcome> {
    let (hist, input) = match (histogram, record) {
        (Some(p), _) => (StartStopHistogram::parse_text(&fs::read_to_string(&p)?)?, p),
        (None, Some(p)) => {
            let rec = load_record(&p)?;
            if rec.meta_value("mode") == Some("conditioned") {
                return Err(Error::NotEstimable("conditioned records keep only four-fold clusters".into()));
            }
            (start_stop_histogram(&rec, Channel::D1, Channel::D3, 1, TAU_C_RANGE_PS)?, p)
        }
        (None, None) => return Err(Error::InvalidArgument("pass a histogram file or --record".into())),
    };
    let cfg = resolve(args, Some(&parent(&input)))?;
    let digest = cfg.digest();
    let fit = fit_gaussian(&hist)?;
    let tau_c = estimate_tau_c(&hist, cfg.physics.tau_j_ps)?;
    let file = TauCFile {
        version: VERSION,
        config_digest: &digest,
        tau_j_ps: cfg.physics.tau_j_ps,
        histogram_total: hist.total(),
        fitted_fwhm_ps: fit.fwhm,
        fitted_center_ps: fit.center,
        background_per_bin: fit.background,
        tau_c_ps: tau_c,
    };
    let body = to_toml(&file);
    if let Some(dir) = out {
        let run = RunDir::open(&dir, &digest)?;
        let mut table = Vec::new();
        hist.write_text(&mut table)?;
        run.write_text("histogram.csv", &String::from_utf8_lossy(&table))?;
        run.write_text("tauc.toml", &body)?;
    }
    print!("{body}");
    Ok(Outcome::Ok)
}
