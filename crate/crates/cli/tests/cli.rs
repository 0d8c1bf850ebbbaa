use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use asyncswap::config::ExperimentConfig;
use asyncswap::mc::AnalyzerMode;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asyncswap")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn small_config(dir: &Path, edit: impl FnOnce(&mut ExperimentConfig)) -> String {
    let mut cfg = ExperimentConfig::preset("paper-swap").unwrap();
    cfg.physics.duration_s = 7200.0;
    cfg.tomography.bootstrap = 0;
    cfg.analysis.min_counts = 20;
    edit(&mut cfg);
    let p = dir.join("in.toml");
    fs::write(&p, cfg.to_toml()).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_then_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |_| {});
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = run(&["simulate", "--config", &cfg, "--seed", "7", "--out", s(d)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(a.join("record.tsr")).unwrap(), fs::read(b.join("record.tsr")).unwrap());
    assert!(!a.join(".asyncswap.lock").exists());

    let rec = a.join("record.tsr");
    let o = run(&["analyze", "--record", s(&rec), "--windows", "560,1200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // Outputs are stamped with the effective configuration, overrides included.
    let mut effective = ExperimentConfig::load(&a.join("config.toml")).unwrap();
    let stamped = |f: &str, digest: &str| {
        let text = fs::read_to_string(a.join(f)).unwrap();
        let first = text.lines().next().unwrap().to_string();
        assert!(first.starts_with("# asyncswap ") && first.ends_with(digest), "{f}: {first}");
    };
    stamped("ground_truth.toml", &effective.digest());
    effective.analysis.windows_ps = vec![560, 1200];
    for f in ["report.toml", "report.csv", "counts_1200ps.txt", "rho_1200ps.txt"] {
        stamped(f, &effective.digest());
    }

    let o = run(&["tomo", s(&a.join("counts_1200ps.txt")), "--out", s(&tmp.path().join("t"))]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("phase_max_fidelity"));
    let o = run(&["metrics", s(&a.join("rho_1200ps.txt"))]);
    assert_eq!(code(&o), 0);
    let o = run(&["sweep", "--record", s(&rec), "--windows", "40,80,150,560,1200", "--out", s(&tmp.path().join("w"))]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("slope below"));
    // τ_c is not recoverable from a conditioned record.
    assert_eq!(code(&run(&["tauc", "--record", s(&rec)])), 4);
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let zero = small_config(tmp.path(), |c| c.physics.duration_s = 0.0);
    assert_eq!(code(&run(&["simulate", "--config", &zero, "--out", s(&tmp.path().join("z"))])), 2);
    assert_eq!(code(&run(&["simulate", "--preset", "no-such-preset"])), 2);
    assert_eq!(code(&run(&["analyze", "--record", s(&tmp.path().join("missing.tsr")), "--preset", "paper-swap"])), 3);

    let garbage = tmp.path().join("garbage.tsr");
    fs::write(&garbage, b"not a record").unwrap();
    assert_eq!(code(&run(&["analyze", "--record", s(&garbage), "--preset", "paper-swap"])), 3);

    let locked = tmp.path().join("locked");
    fs::create_dir(&locked).unwrap();
    fs::write(locked.join(".asyncswap.lock"), "").unwrap();
    let cfg = small_config(tmp.path(), |c| c.physics.duration_s = 60.0);
    assert_eq!(code(&run(&["simulate", "--config", &cfg, "--out", s(&locked)])), 3);
    assert!(!locked.join("record.tsr").exists());
}

#[test]
fn open_analyzers_degrade_analysis() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |c| {
        c.physics.analyzers = AnalyzerMode::Open;
        c.physics.duration_s = 600.0;
    });
    let out = tmp.path().join("open");
    assert_eq!(code(&run(&["simulate", "--config", &cfg, "--out", s(&out)])), 0);
    let o = run(&["analyze", "--record", s(&out.join("record.tsr"))]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tomography skipped"));
    assert!(out.join("report.toml").exists());
}
