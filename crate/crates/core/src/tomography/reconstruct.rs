use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::CountTable;
use super::settings::{settings, MeasurementSetting};
use crate::error::{Error, Result};
use crate::quantum::{entanglement_report, CMatrix, CVector, DensityOperator, EntanglementReport, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleOptions {
    /// Dilution of each step, halved whenever a step would lower the likelihood.
    pub epsilon: f64,
    /// Stop once the relative likelihood gain of a step falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { epsilon: 0.1, tol: 1e-10, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub rho: DensityOperator,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted step, starting with the initial state.
    pub likelihood_trace: Vec<f64>,
    pub bootstrap_std: Option<MetricStd>,
}

/// Sample standard deviations of the entanglement metrics over resamples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricStd {
    pub fidelity: f64,
    pub phase_max_fidelity: f64,
    pub theta_star: f64,
    pub concurrence: Option<f64>,
    pub eof: Option<f64>,
    pub witness_value: Option<f64>,
    pub resamples: usize,
}

/// Product states of every setting, in table order.
struct Design {
    states: Vec<CVector>,
    dim: usize,
}

impl Design {
    fn new(n_modes: usize) -> Result<Self> {
        let states = settings(n_modes)?.iter().map(|s| s.state().amplitudes().clone()).collect();
        Ok(Self { states, dim: 1 << n_modes })
    }

    fn probs(&self, rho: &CMatrix) -> Vec<f64> {
        self.states.iter().map(|s| (s.adjoint() * rho * s)[(0, 0)].re).collect()
    }
}

fn log_likelihood(counts: &[u64], probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(probs)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &p)| if p > 0.0 { c as f64 * p.ln() } else { f64::NEG_INFINITY })
        .sum()
}

/// Poisson log-likelihood `Σ c_j ln p_j(ρ)` of a state, up to a constant.
pub fn log_likelihood_of(counts: &CountTable, rho: &DensityOperator) -> Result<f64> {
    let design = Design::new(counts.n_modes())?;
    if rho.dim() != design.dim {
        return Err(Error::DimensionMismatch { expected: design.dim, got: rho.dim() });
    }
    Ok(log_likelihood(counts.counts(), &design.probs(rho.matrix())))
}

const PAULI_BASES: [(usize, usize); 3] = [(2, 3), (4, 5), (0, 1)]; // X: D/A, Y: R/L, Z: H/V

fn pauli(k: usize) -> CMatrix {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Pauli-moment estimate `ρ = 2⁻ⁿ Σ_P ⟨P⟩ P`. Each moment pools every
/// basis group compatible with it. May be non-positive.
pub fn linear_inversion(counts: &CountTable) -> Result<CMatrix> {
    let n = counts.n_modes();
    let c = counts.counts();
    // Group = basis choice per mode (0: X, 1: Y, 2: Z); total per group.
    let n_groups = 3usize.pow(n as u32);
    let group_of = |basis: &[usize]| basis.iter().fold(0, |acc, &b| acc * 3 + b);
    let mut group_total = vec![0u64; n_groups];
    let all = settings(n)?;
    let basis_of = |s: &MeasurementSetting| -> Vec<(usize, bool)> {
        s.projectors
            .iter()
            .map(|p| {
                let k = *p as usize;
                let b = PAULI_BASES.iter().position(|&(u, v)| u == k || v == k).unwrap();
                (b, PAULI_BASES[b].0 == k)
            })
            .collect()
    };
    for (s, &cnt) in all.iter().zip(c) {
        let b: Vec<usize> = basis_of(s).iter().map(|x| x.0).collect();
        group_total[group_of(&b)] += cnt;
    }
    if let Some(g) = group_total.iter().position(|&t| t == 0) {
        let mut labels = Vec::new();
        let mut g2 = g;
        for _ in 0..n {
            labels.push(["X", "Y", "Z"][g2 % 3]);
            g2 /= 3;
        }
        labels.reverse();
        return Err(Error::InsufficientCounts(format!("no counts in basis group {}", labels.concat())));
    }

    let dim = 1 << n;
    let mut rho = CMatrix::zeros(dim, dim);
    // Pauli string index: base-4 digits, 0 = I, 1 = X, 2 = Y, 3 = Z.
    for p in 0..4usize.pow(n as u32) {
        let digits: Vec<usize> = (0..n).rev().map(|i| (p / 4usize.pow(i as u32)) % 4).collect();
        let (mut num, mut den) = (0.0, 0u64);
        for (s, &cnt) in all.iter().zip(c) {
            let b = basis_of(s);
            if digits.iter().zip(&b).any(|(&d, &(basis, _))| d != 0 && d - 1 != basis) {
                continue;
            }
            let sign: f64 = digits
                .iter()
                .zip(&b)
                .map(|(&d, &(_, plus))| if d == 0 || plus { 1.0 } else { -1.0 })
                .product();
            num += sign * cnt as f64;
            den += cnt;
        }
        let mut op = pauli(digits[0]);
        for &d in &digits[1..] {
            op = op.kronecker(&pauli(d));
        }
        rho += op * C64::from(num / den as f64);
    }
    Ok(rho / C64::from(dim as f64))
}

/// Nearest density operator by zeroing negative eigenvalues.
pub fn clip_to_physical(m: &CMatrix) -> Result<DensityOperator> {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let eig = h.clone().symmetric_eigen();
    let mut out = CMatrix::zeros(h.nrows(), h.ncols());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let v = eig.eigenvectors.column(i);
            out += v * v.adjoint() * C64::from(l);
        }
    }
    DensityOperator::from_unnormalized(out)
}

/// Diluted iterative maximum-likelihood reconstruction,
/// `ρ ← N[(I + εR) ρ (I + εR)]` with `R = Σ_j (f_j / p_j(ρ)) Π_j`.
pub fn mle_reconstruct(counts: &CountTable, opts: &MleOptions) -> Result<ReconstructionResult> {
    mle_from(counts, opts, None)
}

/// As [`mle_reconstruct`], starting from `start` instead of the maximally mixed state.
pub fn mle_from(counts: &CountTable, opts: &MleOptions, start: Option<&DensityOperator>) -> Result<ReconstructionResult> {
    if !(opts.epsilon > 0.0 && opts.epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {}", opts.epsilon)));
    }
    if !(opts.tol >= 0.0) {
        return Err(Error::InvalidArgument("tol must be non-negative".into()));
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::InsufficientCounts("all counts are zero".into()));
    }
    let design = Design::new(counts.n_modes())?;
    let dim = design.dim;
    let c = counts.counts();
    let f: Vec<f64> = c.iter().map(|&x| x as f64 / total as f64).collect();
    let mut rho = match start {
        Some(s) if s.dim() == dim => {
            // Mix in a little white noise so every outcome has p > 0.
            s.mix(1.0 - 1e-6, &DensityOperator::maximally_mixed(counts.n_modes()))?.into_matrix()
        }
        Some(s) => return Err(Error::DimensionMismatch { expected: dim, got: s.dim() }),
        None => CMatrix::identity(dim, dim) / C64::from(dim as f64),
    };
    let mut probs = design.probs(&rho);
    let mut ll = log_likelihood(c, &probs);
    let mut trace = vec![ll];
    let mut eps = opts.epsilon;
    let identity = CMatrix::identity(dim, dim);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut r = CMatrix::zeros(dim, dim);
        for ((s, &fj), &pj) in design.states.iter().zip(&f).zip(&probs) {
            if fj > 0.0 {
                r += s * s.adjoint() * C64::from(fj / pj);
            }
        }
        loop {
            let k = &identity + &r * C64::from(eps);
            let mut next = &k * &rho * k.adjoint();
            let tr = next.trace().re;
            next /= C64::from(tr);
            next = (&next + next.adjoint()) * C64::from(0.5);
            let p_next = design.probs(&next);
            let ll_next = log_likelihood(c, &p_next);
            if ll_next >= ll {
                let gain = ll_next - ll;
                rho = next;
                probs = p_next;
                ll = ll_next;
                trace.push(ll);
                converged = gain <= opts.tol * ll.abs();
                break;
            }
            eps /= 2.0;
            if eps < 1e-14 {
                // No ascent at any dilution: stationary to machine precision.
                converged = true;
                break;
            }
        }
        if converged {
            break;
        }
    }
    Ok(ReconstructionResult {
        rho: DensityOperator::from_unnormalized(rho)?,
        log_likelihood: ll,
        iterations,
        converged,
        likelihood_trace: trace,
        bootstrap_std: None,
    })
}

/// Poisson resample of every setting's count.
pub fn poisson_resample(counts: &CountTable, seed: u64, index: u64) -> CountTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let resampled = counts
        .counts()
        .iter()
        .map(|&c| if c == 0 { 0 } else { Poisson::new(c as f64).unwrap().sample(&mut rng) as u64 })
        .collect();
    let mut out = CountTable::from_counts(counts.n_modes(), resampled).expect("same shape");
    out.tau_w_ps = counts.tau_w_ps;
    out.duration_s = counts.duration_s;
    out.digest = counts.digest.clone();
    out
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn wrap(x: f64) -> f64 {
    let t = x.rem_euclid(std::f64::consts::TAU);
    if t > std::f64::consts::PI {
        t - std::f64::consts::TAU
    } else {
        t
    }
}

/// Bootstrap with a caller-supplied resampler; `resample(counts, i)` gives
/// the `i`-th resampled table. Each resample is warm-started from `point`.
pub fn bootstrap_with<F>(
    counts: &CountTable,
    point: &DensityOperator,
    n_resamples: usize,
    opts: &MleOptions,
    resample: F,
) -> Result<MetricStd>
where
    F: Fn(&CountTable, usize) -> CountTable + Sync,
{
    let reference = entanglement_report(point)?;
    let reports: Vec<EntanglementReport> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let t = resample(counts, i);
            let r = mle_from(&t, opts, Some(point))?;
            entanglement_report(&r.rho)
        })
        .collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&EntanglementReport) -> f64| sample_std(&reports.iter().map(f).collect::<Vec<_>>());
    let opt = |f: &dyn Fn(&EntanglementReport) -> Option<f64>| {
        let xs: Option<Vec<f64>> = reports.iter().map(f).collect();
        xs.map(|x| sample_std(&x))
    };
    Ok(MetricStd {
        fidelity: col(&|r| r.fidelity),
        phase_max_fidelity: col(&|r| r.phase_max_fidelity),
        theta_star: col(&|r| wrap(r.theta_star - reference.theta_star)),
        concurrence: opt(&|r| r.concurrence),
        eof: opt(&|r| r.eof),
        witness_value: opt(&|r| r.witness_value),
        resamples: n_resamples,
    })
}

pub const MIN_BOOTSTRAP: usize = 100;

/// Poisson bootstrap of the entanglement metrics.
pub fn bootstrap_errors(
    counts: &CountTable,
    point: &DensityOperator,
    n_resamples: usize,
    opts: &MleOptions,
    seed: u64,
) -> Result<MetricStd> {
    if n_resamples < MIN_BOOTSTRAP {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP} resamples, got {n_resamples}"
        )));
    }
    bootstrap_with(counts, point, n_resamples, opts, |c, i| poisson_resample(c, seed, i as u64))
}
