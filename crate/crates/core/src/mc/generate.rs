use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use rayon::prelude::*;

use super::config::{AnalyzerMode, Circuit, GenerationMode, PhysicsConfig};
use super::record::{Channel, DetectionEvent, TimestampRecord, Truth};
use crate::error::{Error, Result};
use crate::optics::{visibility_from_dt, JointOutcome, PhotonFate, SingleOutcome, SourceLabel, TransferTables};
use crate::tomography::settings;

pub const RNG_NAME: &str = "chacha8";
const PS: f64 = 1e-12;
/// Jitter and pair offsets are truncated at this many standard deviations.
const TRUNCATION: f64 = 5.0;
/// Idlers whose wavepacket centers are further apart than this many τ_c
/// never interfere.
const MATCH_RADIUS: f64 = 4.0;
/// Pair ids are `shard << ID_SHIFT | counter`.
const ID_SHIFT: u32 = 40;

fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * LN_2).sqrt())
}

fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

struct Sampler<T> {
    items: Vec<T>,
    cum: Vec<f64>,
}

impl<T: Copy> Sampler<T> {
    fn new(items: impl IntoIterator<Item = (T, f64)>) -> Self {
        let mut acc = 0.0;
        let (items, cum) = items
            .into_iter()
            .map(|(t, p)| {
                acc += p;
                (t, acc)
            })
            .unzip();
        Self { items, cum }
    }

    fn draw(&self, rng: &mut impl Rng) -> T {
        let u = rng.gen::<f64>() * self.cum.last().copied().unwrap_or(0.0);
        let i = self.cum.partition_point(|&c| c <= u).min(self.items.len() - 1);
        self.items[i]
    }
}

struct Tables {
    same: Sampler<JointOutcome>,
    diff: Sampler<JointOutcome>,
    single_a: Sampler<SingleOutcome>,
    single_b: Sampler<SingleOutcome>,
}

impl From<TransferTables> for Tables {
    fn from(t: TransferTables) -> Self {
        Self {
            same: Sampler::new(t.same.into_iter().map(|o| (o, o.prob))),
            diff: Sampler::new(t.diff.into_iter().map(|o| (o, o.prob))),
            single_a: Sampler::new(t.single_a.into_iter().map(|o| (o, o.prob))),
            single_b: Sampler::new(t.single_b.into_iter().map(|o| (o, o.prob))),
        }
    }
}

struct Timing {
    sigma_j: f64,
    sigma_c: f64,
    tau_c: f64,
    eta: [f64; 4],
}

impl Timing {
    fn truncated(sigma: f64, rng: &mut impl Rng) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z.abs() <= TRUNCATION {
                return z * sigma;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    source: SourceLabel,
    id: u64,
    emit: f64,
    /// Whether the signal photon survived its channel losses.
    signal: bool,
}

/// Reusable buffers for turning emitted pairs into detections.
#[derive(Default)]
struct Scene {
    pairs: Vec<Pair>,
    centers: Vec<f64>,
    a_idx: Vec<usize>,
    b_idx: Vec<usize>,
    edges: Vec<(f64, usize, usize)>,
    matched: Vec<bool>,
    events: Vec<(Channel, f64, Truth)>,
}

impl Scene {
    fn clear(&mut self) {
        self.pairs.clear();
        self.events.clear();
    }

    fn resolve(&mut self, tabs: &Tables, tm: &Timing, rng: &mut ChaCha8Rng) {
        let n = self.pairs.len();
        self.centers.clear();
        for p in &self.pairs {
            self.centers.push(p.emit + Timing::truncated(tm.sigma_c, rng));
        }
        self.a_idx.clear();
        self.b_idx.clear();
        for (i, p) in self.pairs.iter().enumerate() {
            match p.source {
                SourceLabel::A => self.a_idx.push(i),
                SourceLabel::B => self.b_idx.push(i),
            }
        }
        let centers = &self.centers;
        self.a_idx.sort_by(|&x, &y| centers[x].total_cmp(&centers[y]));
        self.b_idx.sort_by(|&x, &y| centers[x].total_cmp(&centers[y]));

        // Greedy nearest-center matching of A idlers with B idlers.
        let radius = MATCH_RADIUS * tm.tau_c;
        self.edges.clear();
        let mut lo = 0;
        for &a in &self.a_idx {
            let ca = centers[a];
            while lo < self.b_idx.len() && centers[self.b_idx[lo]] < ca - radius {
                lo += 1;
            }
            for &b in self.b_idx[lo..].iter().take_while(|&&b| centers[b] <= ca + radius) {
                self.edges.push(((centers[b] - ca).abs(), a, b));
            }
        }
        self.edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        self.matched.clear();
        self.matched.resize(n, false);
        for k in 0..self.edges.len() {
            let (dt, a, b) = self.edges[k];
            if self.matched[a] || self.matched[b] {
                continue;
            }
            self.matched[a] = true;
            self.matched[b] = true;
            let v = visibility_from_dt(dt, tm.tau_c).expect("tau_c validated").value();
            let indistinguishable = rng.gen::<f64>() < v;
            let out = if indistinguishable { tabs.same.draw(rng) } else { tabs.diff.draw(rng) };
            let (pa, pb) = (self.pairs[a], self.pairs[b]);
            self.signal(pa, out.pass1, Channel::D1, tm, rng);
            self.signal(pb, out.pass2, Channel::D2, tm, rng);
            // Distinguishable fates are labeled [B idler, A idler]; identical
            // photons get the two output slots in random order.
            let [mut fb, mut fa] = out.fates;
            if indistinguishable && rng.gen::<bool>() {
                std::mem::swap(&mut fa, &mut fb);
            }
            self.idler(pa, self.centers[a], fa, tm, rng);
            self.idler(pb, self.centers[b], fb, tm, rng);
        }
        for i in 0..n {
            if self.matched[i] {
                continue;
            }
            let p = self.pairs[i];
            let (table, ch) = match p.source {
                SourceLabel::A => (&tabs.single_a, Channel::D1),
                SourceLabel::B => (&tabs.single_b, Channel::D2),
            };
            let out = table.draw(rng);
            self.signal(p, out.pass, ch, tm, rng);
            self.idler(p, self.centers[i], out.fate, tm, rng);
        }
    }

    fn truth(p: Pair) -> Truth {
        Truth::Pair { source: p.source, pair_id: p.id }
    }

    fn signal(&mut self, p: Pair, pass: bool, ch: Channel, tm: &Timing, rng: &mut ChaCha8Rng) {
        if p.signal && pass {
            let t = p.emit + Timing::truncated(tm.sigma_j, rng);
            self.events.push((ch, t, Self::truth(p)));
        }
    }

    fn idler(&mut self, p: Pair, center: f64, fate: PhotonFate, tm: &Timing, rng: &mut ChaCha8Rng) {
        let ch = match fate {
            PhotonFate::D3 => Channel::D3,
            PhotonFate::D4 => Channel::D4,
            PhotonFate::Blocked => return,
        };
        if rng.gen::<f64>() < tm.eta[ch.index()] {
            let t = center + Timing::truncated(tm.sigma_j, rng);
            self.events.push((ch, t, Self::truth(p)));
        }
    }
}

fn poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// Poisson draw conditioned on being at least one.
fn zero_truncated_poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean > 20.0 {
        loop {
            let k = poisson(mean, rng);
            if k > 0 {
                return k;
            }
        }
    }
    let e = (-mean).exp();
    let mut u = rng.gen::<f64>() * (1.0 - e);
    let mut k = 1u64;
    let mut p = mean * e;
    while u > p && k < 1000 {
        u -= p;
        k += 1;
        p *= mean / k as f64;
    }
    k
}

/// Rates of one detector's background, split by truth.
fn background(rng: &mut impl Rng, stray: f64, dark: f64) -> Truth {
    if rng.gen::<f64>() * (stray + dark) < stray {
        Truth::Stray
    } else {
        Truth::Dark
    }
}

struct Shard {
    index: usize,
    start: i64,
    end: i64,
}

type Emitted = Vec<(Channel, DetectionEvent)>;

fn full_shard(cfg: &PhysicsConfig, tabs: &Tables, tm: &Timing, shard: &Shard, rng: &mut ChaCha8Rng) -> Emitted {
    let len = (shard.end - shard.start) as f64;
    let mut scene = Scene::default();
    let mut next_id = (shard.index as u64) << ID_SHIFT;
    for (source, rate, eta) in [
        (SourceLabel::A, cfg.pair_rate_a_hz, cfg.efficiency[0]),
        (SourceLabel::B, cfg.pair_rate_b_hz, cfg.efficiency[1]),
    ] {
        let rate = rate * PS;
        if rate <= 0.0 {
            continue;
        }
        let mut t = 0.0;
        loop {
            t += { let e: f64 = Exp1.sample(rng); e } / rate;
            if t >= len {
                break;
            }
            scene.pairs.push(Pair { source, id: next_id, emit: t, signal: rng.gen::<f64>() < eta });
            next_id += 1;
        }
    }
    scene.resolve(tabs, tm, rng);
    for ch in Channel::ALL {
        let (stray, dark) = (cfg.stray_rate_hz[ch.index()], cfg.dark_rate_hz[ch.index()]);
        let rate = (stray + dark) * PS;
        if rate <= 0.0 {
            continue;
        }
        let mut t = 0.0;
        loop {
            t += { let e: f64 = Exp1.sample(rng); e } / rate;
            if t >= len {
                break;
            }
            let truth = background(rng, stray, dark);
            scene.events.push((ch, t, truth));
        }
    }
    scene
        .events
        .iter()
        .map(|&(ch, t, truth)| (ch, DetectionEvent { time: shard.start + round_half_up(t), truth }))
        .collect()
}

fn conditioned_shard(
    cfg: &PhysicsConfig,
    tabs: &Tables,
    tm: &Timing,
    shard: &Shard,
    rng: &mut ChaCha8Rng,
) -> Emitted {
    let w = cfg.generation.max_window_ps.round() as i64;
    let half_w = w as f64 / 2.0;
    let eta = cfg.efficiency;
    let ra = cfg.pair_rate_a_hz * PS;
    let rb = cfg.pair_rate_b_hz * PS;
    let (s, d) = (cfg.stray_rate_hz.map(|x| x * PS), cfg.dark_rate_hz.map(|x| x * PS));

    // D1 starts: A pairs whose signal survives, plus D1 background.
    let anchor_pair = ra * eta[0];
    let anchor_rate = anchor_pair + s[0] + d[0];
    // D2 stops that could fall within the window of a start.
    let reach = half_w + 2.0 * TRUNCATION * tm.sigma_j + 2.0;
    let cand_pair = rb * eta[1];
    let cand_rate = cand_pair + s[1] + d[1];
    let cand_mean = cand_rate * 2.0 * reach;
    let thinned = anchor_rate * (1.0 - (-cand_mean).exp());
    if thinned <= 0.0 {
        return Vec::new();
    }
    // Pairs further out can neither land in the window nor interfere with one that does.
    let region = reach + TRUNCATION * tm.sigma_c + MATCH_RADIUS * tm.tau_c;

    let mut scene = Scene::default();
    let mut out = Vec::new();
    let mut next_id = (shard.index as u64) << ID_SHIFT;
    let mut id = || {
        next_id += 1;
        next_id - 1
    };
    let (mut now, mut frac) = (shard.start, 0.0f64);
    loop {
        let step = frac + { let e: f64 = Exp1.sample(rng); e } / thinned;
        let whole = step.floor();
        now += whole as i64;
        frac = step - whole;
        if now >= shard.end {
            break;
        }
        scene.clear();
        let u = rng.gen::<f64>() * anchor_rate;
        if u < anchor_pair {
            scene.pairs.push(Pair { source: SourceLabel::A, id: id(), emit: 0.0, signal: true });
        } else {
            let truth = if u < anchor_pair + s[0] { Truth::Stray } else { Truth::Dark };
            scene.events.push((Channel::D1, 0.0, truth));
        }
        for _ in 0..zero_truncated_poisson(cand_mean, rng) {
            let t = rng.gen_range(-reach..=reach);
            let u = rng.gen::<f64>() * cand_rate;
            if u < cand_pair {
                scene.pairs.push(Pair { source: SourceLabel::B, id: id(), emit: t, signal: true });
            } else {
                let truth = if u < cand_pair + s[1] { Truth::Stray } else { Truth::Dark };
                scene.events.push((Channel::D2, t, truth));
            }
        }
        for _ in 0..poisson(ra * 2.0 * region, rng) {
            let t = rng.gen_range(-region..=region);
            scene.pairs.push(Pair { source: SourceLabel::A, id: id(), emit: t, signal: false });
        }
        for _ in 0..poisson(rb * 2.0 * region, rng) {
            let t = rng.gen_range(-region..=region);
            // B pairs near the start whose signal survives are the candidates above.
            if t.abs() <= reach && rng.gen::<f64>() < eta[1] {
                continue;
            }
            scene.pairs.push(Pair { source: SourceLabel::B, id: id(), emit: t, signal: false });
        }
        for ch in [Channel::D3, Channel::D4] {
            let (si, di) = (s[ch.index()], d[ch.index()]);
            for _ in 0..poisson((si + di) * 2.0 * reach, rng) {
                let t = rng.gen_range(-reach..=reach);
                let truth = background(rng, si, di);
                scene.events.push((ch, t, truth));
            }
        }
        scene.resolve(tabs, tm, rng);

        let abs = |t: f64| now + round_half_up(frac + t);
        let Some(start) = scene.events.iter().find(|e| e.0 == Channel::D1).map(|e| abs(e.1)) else {
            continue;
        };
        let inside = |t: i64| 2 * (t - start).abs() <= w;
        let mut seen = [false; 4];
        for &(ch, t, _) in &scene.events {
            if inside(abs(t)) {
                seen[ch.index()] = true;
            }
        }
        if seen.iter().all(|&x| x) {
            for &(ch, t, truth) in &scene.events {
                let time = abs(t);
                if inside(time) {
                    out.push((ch, DetectionEvent { time, truth }));
                }
            }
        }
    }
    out
}

/// Simulates one run of `circuit`. Deterministic in `cfg.seed`.
///
/// Tomography settings are applied in sequential blocks of equal length.
/// Each block is an independent shard with its own RNG stream.
pub fn generate_run(cfg: &PhysicsConfig, circuit: Circuit) -> Result<TimestampRecord> {
    cfg.validate()?;
    let duration = cfg.duration_ps();
    if duration <= 0 {
        return Err(Error::Config("duration rounds to zero picoseconds".into()));
    }
    let rho_a = cfg.source_a.density()?;
    let rho_b = cfg.source_b.density()?;
    let setting_list = match cfg.analyzers {
        AnalyzerMode::Tomography => settings(circuit.analyzed_modes())?.into_iter().map(Some).collect(),
        AnalyzerMode::Open => vec![None],
    };
    let tables = setting_list
        .iter()
        .map(|s| {
            TransferTables::new(circuit.element(), circuit.analyzers(s.as_ref()), &rho_a, &rho_b).map(Tables::from)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = tables.len() as i64;
    let block = duration / n;
    if block == 0 {
        return Err(Error::Config(format!("duration too short for {n} settings")));
    }
    let tm = Timing {
        sigma_j: fwhm_to_sigma(cfg.tau_j_ps),
        sigma_c: fwhm_to_sigma(cfg.tau_c_ps),
        tau_c: cfg.tau_c_ps,
        eta: cfg.efficiency,
    };
    let shards: Vec<Emitted> = (0..n)
        .into_par_iter()
        .map(|k| {
            let shard = Shard {
                index: k as usize,
                start: k * block,
                end: if k == n - 1 { duration } else { (k + 1) * block },
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let tabs = &tables[k as usize];
            match cfg.generation.mode {
                GenerationMode::Full => full_shard(cfg, tabs, &tm, &shard, &mut rng),
                GenerationMode::Conditioned => conditioned_shard(cfg, tabs, &tm, &shard, &mut rng),
            }
        })
        .collect();

    let events = shards.into_iter().flatten().filter(|(_, e)| (0..duration).contains(&e.time));
    let mut record = TimestampRecord::from_events(duration, events);
    record.apply_dead_time(cfg.dead_time_ps);
    record.digest = cfg.digest(circuit);
    let mut meta = BTreeMap::new();
    meta.insert("circuit".into(), circuit.to_string());
    meta.insert(
        "mode".into(),
        match cfg.generation.mode {
            GenerationMode::Full => "full".into(),
            GenerationMode::Conditioned => "conditioned".into(),
        },
    );
    if cfg.generation.mode == GenerationMode::Conditioned {
        meta.insert("w_max_ps".into(), cfg.generation.max_window_ps.round().to_string());
    }
    meta.insert("seed".into(), cfg.seed.to_string());
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    meta.insert("rng".into(), format!("{RNG_NAME}, stream = setting block"));
    meta.insert("n_settings".into(), n.to_string());
    meta.insert("n_modes".into(), if n > 1 { circuit.analyzed_modes().to_string() } else { "0".into() });
    meta.insert("block_ps".into(), block.to_string());
    record.meta = meta;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn truncated_poisson_matches_its_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mean in [1e-4, 0.5, 3.0, 40.0] {
            let n = 200_000;
            let sum: u64 = (0..n).map(|_| zero_truncated_poisson(mean, &mut rng)).sum();
            let expect = mean / (1.0 - (-mean).exp());
            assert!((sum as f64 / n as f64 - expect).abs() < 0.02 * expect.max(1.0), "mean {mean}");
        }
    }

    #[test]
    fn truncation_bounds_offsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100_000 {
            assert!(Timing::truncated(10.0, &mut rng).abs() <= 50.0);
        }
        assert_eq!(Timing::truncated(0.0, &mut rng), 0.0);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(0.5), 1);
        assert_eq!(round_half_up(-0.5), 0);
        assert_eq!(round_half_up(-0.6), -1);
        assert_eq!(round_half_up(2.49), 2);
    }
}
