use asyncswap::config::ExperimentConfig;
use asyncswap::mc::{
    generate_run, ground_truth_report, read_record, write_record, AnalyzerMode, Channel, Circuit, GenerationMode,
    PhysicsConfig,
};
use asyncswap::tdc::{classify_fourfolds, histogram_times, sweep_windows, StopPolicy};

fn swap_physics() -> PhysicsConfig {
    ExperimentConfig::preset("paper-swap").unwrap().physics
}

fn bytes(cfg: &PhysicsConfig, circuit: Circuit) -> Vec<u8> {
    let mut out = Vec::new();
    write_record(&generate_run(cfg, circuit).unwrap(), &mut out).unwrap();
    out
}

/// P(|X| ≤ a) for X ~ N(0, σ²), by Simpson's rule.
fn central_mass(a: f64, sigma: f64) -> f64 {
    let n = 2000;
    let h = 2.0 * a / n as f64;
    let f = |x: f64| (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut s = f(-a) + f(a);
    for i in 1..n {
        s += f(-a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let mut cfg = swap_physics();
    cfg.duration_s = 2.0 * 3600.0;
    let a = bytes(&cfg, Circuit::Swap);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| bytes(&cfg, Circuit::Swap));
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let c = four.install(|| bytes(&cfg, Circuit::Swap));
    assert!(a == b && b == c);
    cfg.seed += 1;
    assert_ne!(a, bytes(&cfg, Circuit::Swap));

    let rec = read_record(a.as_slice()).unwrap();
    assert_eq!(rec.meta_value("seed"), Some("20170101"));
    assert_eq!(rec.meta_value("mode"), Some("conditioned"));
}

#[test]
fn full_generation_is_deterministic() {
    let mut cfg = swap_physics();
    cfg.generation.mode = GenerationMode::Full;
    cfg.duration_s = 0.05;
    cfg.stray_rate_hz = [1e4; 4];
    cfg.dark_rate_hz = [50.0; 4];
    cfg.dead_time_ps = 20_000;
    assert_eq!(bytes(&cfg, Circuit::Ghz), bytes(&cfg, Circuit::Ghz));
}

#[test]
fn stray_only_fourfolds_follow_the_accidental_formula() {
    let mut cfg = swap_physics();
    cfg.generation.mode = GenerationMode::Full;
    cfg.analyzers = AnalyzerMode::Open;
    cfg.pair_rate_a_hz = 0.0;
    cfg.pair_rate_b_hz = 0.0;
    cfg.duration_s = 0.01;
    cfg.stray_rate_hz = [1e8, 1e8, 1e8, 1e8];
    cfg.dark_rate_hz = [0.0, 2e7, 0.0, 0.0];
    let rec = generate_run(&cfg, Circuit::Swap).unwrap();
    let truth = ground_truth_report(&rec);
    assert_eq!(truth.channels[0].pair_a + truth.channels[0].pair_b, 0);

    let n1 = rec.channel(Channel::D1).len() as f64;
    for tau_w in [400i64, 1000] {
        // Integer stop times in a closed window of width τ_w.
        let slots = (2 * (tau_w / 2) + 1) as f64 * 1e-12;
        let p = |rate: f64| 1.0 - (-rate * slots).exp();
        let expected = n1 * p(1.2e8) * p(1e8) * p(1e8);
        let got = sweep_windows(&rec, &[tau_w], StopPolicy::Closest).unwrap()[0].count() as f64;
        assert!((got - expected).abs() < 5.0 * expected.sqrt(), "tau_w {tau_w}: {got} vs {expected}");
    }
}

#[test]
fn calibrated_two_fold_rates() {
    let mut cfg = swap_physics();
    cfg.generation.mode = GenerationMode::Full;
    cfg.duration_s = 2.0;
    let rec = generate_run(&cfg, Circuit::Swap).unwrap();
    let d3 = rec.times(Channel::D3);
    let sigma = (cfg.tau_c_ps.powi(2) + 2.0 * cfg.tau_j_ps.powi(2)).sqrt() / (8.0 * 2f64.ln()).sqrt();
    // Signal analyzer passes half on average; HBS and V polarizer pass a quarter.
    let share = 0.5 * 0.25 * central_mass(40.5, sigma);
    for (ch, rate, eta) in [(Channel::D1, cfg.pair_rate_a_hz, cfg.efficiency[0]), (Channel::D2, cfg.pair_rate_b_hz, cfg.efficiency[1])] {
        let n = histogram_times(&rec.times(ch), &d3, 1, 40).unwrap().total() as f64;
        let expected = rate * cfg.duration_s * eta * cfg.efficiency[2] * share;
        assert!((n - expected).abs() < 5.0 * expected.sqrt(), "{ch}: {n} vs {expected}");
        let khz = n / cfg.duration_s / 1e3;
        assert!((khz - if ch == Channel::D1 { 5.1 } else { 5.2 }).abs() < 0.25, "{ch}: {khz} kHz");
    }
}

#[test]
fn conditioned_generation_matches_full() {
    let mut cfg = swap_physics();
    cfg.analyzers = AnalyzerMode::Open;
    // High enough that neighbouring pairs and strays overlap often.
    cfg.pair_rate_a_hz = 1e7;
    cfg.pair_rate_b_hz = 1e7;
    cfg.efficiency = [1.0; 4];
    cfg.stray_rate_hz = [1e6; 4];
    cfg.duration_s = 0.3;
    let windows = [230, 560, 1200];

    let mut full = cfg.clone();
    full.generation.mode = GenerationMode::Full;
    let full = generate_run(&full, Circuit::Swap).unwrap();
    cfg.seed += 1;
    let cond = generate_run(&cfg, Circuit::Swap).unwrap();

    let a = sweep_windows(&full, &windows, StopPolicy::Closest).unwrap();
    let b = sweep_windows(&cond, &windows, StopPolicy::Closest).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let (n, m) = (x.count() as f64, y.count() as f64);
        assert!(n > 100.0);
        assert!((n - m).abs() < 4.5 * (n + m).sqrt(), "tau_w {}: full {n}, conditioned {m}", x.tau_w);
        let (tf, tc) = (classify_fourfolds(&full, &x.events), classify_fourfolds(&cond, &y.events));
        let (gf, gc) = (tf.genuine as f64, tc.genuine as f64);
        assert!((gf - gc).abs() < 4.5 * (gf + gc).sqrt());
    }
    // The conditioned record keeps far fewer events.
    assert!(cond.len() * 10 < full.len());
}

#[test]
fn record_metadata_describes_the_tomography_layout() {
    let mut cfg = ExperimentConfig::preset("paper-ghz").unwrap().physics;
    cfg.duration_s = 3600.0;
    let rec = generate_run(&cfg, Circuit::Ghz).unwrap();
    assert_eq!(rec.meta_value("n_settings"), Some("216"));
    assert_eq!(rec.meta_value("n_modes"), Some("3"));
    let block: i64 = rec.meta_parse("block_ps").unwrap();
    assert!(block * 216 <= rec.duration_ps && block * 217 > rec.duration_ps);
    assert_eq!(rec.digest, cfg.digest(Circuit::Ghz));

    let mut open = cfg.clone();
    open.analyzers = AnalyzerMode::Open;
    assert_eq!(generate_run(&open, Circuit::Ghz).unwrap().meta_value("n_settings"), Some("1"));
}

#[test]
fn invalid_physics_is_rejected() {
    let base = swap_physics();
    let mut bad = vec![];
    let mut c = base.clone();
    c.duration_s = 0.0;
    bad.push(c);
    let mut c = base.clone();
    c.efficiency[2] = 1.5;
    bad.push(c);
    let mut c = base.clone();
    c.tau_c_ps = -1.0;
    bad.push(c);
    let mut c = base.clone();
    c.pair_rate_a_hz = f64::NAN;
    bad.push(c);
    let mut c = base;
    c.source_a.state = "ghz".into();
    bad.push(c);
    for c in bad {
        assert!(c.validate().is_err());
        assert!(generate_run(&c, Circuit::Swap).is_err());
    }
}
