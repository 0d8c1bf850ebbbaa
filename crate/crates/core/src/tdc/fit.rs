use std::f64::consts::LN_2;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::histogram::StartStopHistogram;
use crate::error::{Error, Result};

pub const MIN_FIT_COUNTS: u64 = 100;
const FIT_TOL: f64 = 1e-9;
const FIT_MAX_ITER: usize = 500;

/// `amplitude · exp(−4 ln2 (x − center)² / fwhm²) + background`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    pub background: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn model(p: &Vector4<f64>, x: f64) -> (f64, Vector4<f64>) {
    let (a, mu, w, _) = (p[0], p[1], p[2], p[3]);
    let d = x - mu;
    let g = (-4.0 * LN_2 * d * d / (w * w)).exp();
    let grad = Vector4::new(
        g,
        a * g * 8.0 * LN_2 * d / (w * w),
        a * g * 8.0 * LN_2 * d * d / (w * w * w),
        1.0,
    );
    (a * g + p[3], grad)
}

fn initial_guess(x: &[f64], y: &[f64]) -> Vector4<f64> {
    let n = x.len();
    let edge = (n / 10).max(1);
    let mut tails: Vec<f64> = y[..edge].iter().chain(&y[n - edge..]).copied().collect();
    tails.sort_by(f64::total_cmp);
    let background = tails[tails.len() / 2];
    let (mut s0, mut s1) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let w = (yi - background).max(0.0);
        s0 += w;
        s1 += w * xi;
    }
    let mu = if s0 > 0.0 { s1 / s0 } else { 0.0 };
    let mut s2 = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        s2 += (yi - background).max(0.0) * (xi - mu) * (xi - mu);
    }
    let sigma = if s0 > 0.0 { (s2 / s0).sqrt() } else { 0.0 };
    let span = x[n - 1] - x[0];
    let fwhm = (sigma * 2.0 * (2.0 * LN_2).sqrt()).clamp(span / n as f64, span.max(1.0));
    let peak = y.iter().copied().fold(f64::MIN, f64::max);
    Vector4::new(peak - background, mu, fwhm.max(1.0), background)
}

/// Levenberg–Marquardt least-squares fit of a Gaussian on a flat floor.
pub fn fit_gaussian(hist: &StartStopHistogram) -> Result<GaussianFit> {
    let total = hist.total();
    if total < MIN_FIT_COUNTS {
        return Err(Error::InsufficientCounts(format!(
            "histogram has {total} counts, need at least {MIN_FIT_COUNTS}"
        )));
    }
    let x: Vec<f64> = (0..hist.counts.len()).map(|k| hist.center(k)).collect();
    let y: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    if x.len() < 5 {
        return Err(Error::NotEstimable("histogram has fewer than five bins".into()));
    }
    let sse = |p: &Vector4<f64>| -> f64 { x.iter().zip(&y).map(|(&xi, &yi)| (yi - model(p, xi).0).powi(2)).sum() };

    let mut p = initial_guess(&x, &y);
    let mut cost = sse(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < FIT_MAX_ITER {
        iterations += 1;
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (&xi, &yi) in x.iter().zip(&y) {
            let (f, g) = model(&p, xi);
            jtj += g * g.transpose();
            jtr += g * (yi - f);
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for i in 0..4 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let c = sse(&trial);
            if c.is_finite() && c <= cost {
                let small = (0..4).all(|i| step[i].abs() <= FIT_TOL * trial[i].abs().max(1e-12));
                p = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                converged = small;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step left at any damping: a minimum to machine precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    Ok(GaussianFit {
        amplitude: p[0],
        center: p[1],
        fwhm: p[2].abs(),
        background: p[3],
        iterations,
        converged,
    })
}

/// Deconvolves two detector jitters from the fitted width:
/// `τ_c = √(w² − 2τ_j²)`.
pub fn tau_c_from_fwhm(fwhm: f64, tau_j: f64) -> Result<f64> {
    let d = fwhm * fwhm - 2.0 * tau_j * tau_j;
    // Relative slack so that the exact boundary w = √2·τ_j is rejected.
    if !(d > 1e-9 * fwhm * fwhm) {
        return Err(Error::NotEstimable(format!(
            "fitted FWHM {fwhm:.3} ps does not exceed the jitter floor √2·{tau_j} ps"
        )));
    }
    Ok(d.sqrt())
}

pub fn estimate_tau_c(hist: &StartStopHistogram, tau_j: f64) -> Result<f64> {
    if !(tau_j.is_finite() && tau_j >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau_j must be non-negative, got {tau_j}")));
    }
    let fit = fit_gaussian(hist)?;
    tau_c_from_fwhm(fit.fwhm, tau_j)
}
