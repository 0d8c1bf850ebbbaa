use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{canonical_state, CMatrix, CanonicalState, DensityOperator, StateVector, C64};
use crate::error::{Error, Result};

/// `⟨target|ρ|target⟩`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityOperator, target: &StateVector) -> Result<f64> {
    Ok(rho.expectation(target)?.clamp(0.0, 1.0))
}

/// One-parameter target families optimized over a local phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseFamily {
    /// `(|HV⟩ − e^{iθ}|VH⟩)/√2`
    PsiMinusTheta,
    /// `(|HHH⟩ + e^{iθ}|VVV⟩)/√2`
    GhzTheta,
}

impl PhaseFamily {
    pub fn dim(self) -> usize {
        match self {
            PhaseFamily::PsiMinusTheta => 4,
            PhaseFamily::GhzTheta => 8,
        }
    }

    pub fn member(self, theta: f64) -> Result<StateVector> {
        match self {
            PhaseFamily::PsiMinusTheta => canonical_state(CanonicalState::PsiMinusTheta(theta)),
            PhaseFamily::GhzTheta => canonical_state(CanonicalState::GhzTheta(theta)),
        }
    }

    /// Coefficients `(a, b, c)` with `⟨ψ_θ|ρ|ψ_θ⟩ = a + b cos θ + c sin θ`.
    pub fn sinusoid(self, rho: &DensityOperator) -> Result<(f64, f64, f64)> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        let (i, j, sign) = match self {
            PhaseFamily::PsiMinusTheta => (1, 2, -1.0),
            PhaseFamily::GhzTheta => (0, 7, 1.0),
        };
        let a = 0.5 * (rho.entry(i, i).re + rho.entry(j, j).re);
        let off = rho.entry(i, j);
        // sign·Re(e^{iθ}ρ_ij) = sign·(x cos θ − y sin θ)
        Ok((a, sign * off.re, -sign * off.im))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMaximum {
    pub theta_star: f64,
    pub value: f64,
}

/// Closed-form maximum of the family fidelity over `θ ∈ [−π, π]`.
pub fn phase_max_fidelity(rho: &DensityOperator, family: PhaseFamily) -> Result<PhaseMaximum> {
    let (a, b, c) = family.sinusoid(rho)?;
    let amp = b.hypot(c);
    let theta_star = if amp > 1e-15 { c.atan2(b) } else { 0.0 };
    Ok(PhaseMaximum {
        theta_star,
        value: a + amp,
    })
}

/// Wootters concurrence and entanglement of formation of a two-qubit state.
pub fn concurrence_eof(rho: &DensityOperator) -> Result<(f64, f64)> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let m = rho.matrix();
    // σy⊗σy is real: antidiagonal (-1, 1, 1, -1)
    let mut yy = CMatrix::zeros(4, 4);
    for (k, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(k, 3 - k)] = C64::from(s);
    }
    // λ_i are the singular values of √ρ·√ρ̃ with √ρ̃ = (σy⊗σy)(√ρ)*(σy⊗σy).
    let sqrt_rho = hermitian_sqrt(m);
    let sqrt_tilde = &yy * sqrt_rho.conjugate() * &yy;
    let mut lambdas: Vec<f64> = (&sqrt_rho * sqrt_tilde).singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let conc = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0);
    Ok((conc, eof_from_concurrence(conc)))
}

pub(crate) fn eof_from_concurrence(conc: f64) -> f64 {
    let x = 0.5 * (1.0 + (1.0 - conc * conc).max(0.0).sqrt());
    binary_entropy(x).clamp(0.0, 1.0)
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(m.clone());
    let vecs = &eig.eigenvectors;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        let col = vecs.column(k);
        if w > 1e-14 {
            out += (&col * col.adjoint()) * C64::from(w.sqrt());
        }
    }
    out
}

/// `Tr(Wρ)` for the GHZ witness `W = I/2 − |GHZ_θ⟩⟨GHZ_θ|`.
pub fn witness_value(rho: &DensityOperator, theta: f64) -> Result<f64> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            got: rho.dim(),
        });
    }
    let target = PhaseFamily::GhzTheta.member(theta)?;
    Ok(0.5 - rho.expectation(&target)?)
}

/// `½ Σ |eig(a − b)|`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let diff = (&diff + diff.adjoint()) * C64::from(0.5);
    Ok(0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub fidelity: f64,
    pub theta_star: f64,
    pub phase_max_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eof: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_value: Option<f64>,
}

/// Metrics against `|ψ⁻⟩` for two qubits and `|GHZ⟩` for three.
pub fn entanglement_report(rho: &DensityOperator) -> Result<EntanglementReport> {
    match rho.dim() {
        4 => {
            let target = canonical_state(CanonicalState::PsiMinus)?;
            let pm = phase_max_fidelity(rho, PhaseFamily::PsiMinusTheta)?;
            let (conc, eof) = concurrence_eof(rho)?;
            Ok(EntanglementReport {
                fidelity: fidelity(rho, &target)?,
                theta_star: pm.theta_star,
                phase_max_fidelity: pm.value.clamp(0.0, 1.0),
                concurrence: Some(conc),
                eof: Some(eof),
                witness_value: None,
            })
        }
        8 => {
            let target = canonical_state(CanonicalState::Ghz)?;
            let pm = phase_max_fidelity(rho, PhaseFamily::GhzTheta)?;
            Ok(EntanglementReport {
                fidelity: fidelity(rho, &target)?,
                theta_star: pm.theta_star,
                phase_max_fidelity: pm.value.clamp(0.0, 1.0),
                concurrence: None,
                eof: None,
                witness_value: Some(witness_value(rho, pm.theta_star)?),
            })
        }
        d => Err(Error::InvalidArgument(format!(
            "no entanglement report for dimension {d}"
        ))),
    }
}
