use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use super::{c, StateVector, C64};
use crate::error::{Error, Result};

/// Single-photon polarization states used by analyzers and sources.
///
/// `D = (H+V)/√2`, `A = (H−V)/√2`, `R = (H+iV)/√2`, `L = (H−iV)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::H,
        Polarization::V,
        Polarization::D,
        Polarization::A,
        Polarization::R,
        Polarization::L,
    ];

    pub fn amplitudes(self) -> [C64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Polarization::H => [c(1.0, 0.0), c(0.0, 0.0)],
            Polarization::V => [c(0.0, 0.0), c(1.0, 0.0)],
            Polarization::D => [c(s, 0.0), c(s, 0.0)],
            Polarization::A => [c(s, 0.0), c(-s, 0.0)],
            Polarization::R => [c(s, 0.0), c(0.0, s)],
            Polarization::L => [c(s, 0.0), c(0.0, -s)],
        }
    }

    /// The orthogonal state in the same basis.
    pub fn orthogonal(self) -> Polarization {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
            Polarization::D => Polarization::A,
            Polarization::A => Polarization::D,
            Polarization::R => Polarization::L,
            Polarization::L => Polarization::R,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarization::H => 'H',
            Polarization::V => 'V',
            Polarization::D => 'D',
            Polarization::A => 'A',
            Polarization::R => 'R',
            Polarization::L => 'L',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Self> {
        Some(match ch.to_ascii_uppercase() {
            'H' => Polarization::H,
            'V' => Polarization::V,
            'D' => Polarization::D,
            'A' => Polarization::A,
            'R' => Polarization::R,
            'L' => Polarization::L,
            _ => return None,
        })
    }
}

pub fn polarization(p: Polarization) -> StateVector {
    StateVector::new(p.amplitudes().to_vec()).expect("polarization states are normalized")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalState {
    PhiPlus,
    PsiMinus,
    PsiMinusTheta(f64),
    Ghz,
    GhzTheta(f64),
    H,
    V,
    D,
}

impl fmt::Display for CanonicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalState::PhiPlus => write!(f, "phi_plus"),
            CanonicalState::PsiMinus => write!(f, "psi_minus"),
            CanonicalState::PsiMinusTheta(t) => write!(f, "psi_minus_theta({t})"),
            CanonicalState::Ghz => write!(f, "ghz"),
            CanonicalState::GhzTheta(t) => write!(f, "ghz_theta({t})"),
            CanonicalState::H => write!(f, "h"),
            CanonicalState::V => write!(f, "v"),
            CanonicalState::D => write!(f, "d"),
        }
    }
}

impl FromStr for CanonicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let with_theta = |prefix: &str| -> Option<Result<f64>> {
            let rest = lower.strip_prefix(prefix)?;
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            Some(
                inner
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("angle in `{s}`: {e}"))),
            )
        };
        if let Some(t) = with_theta("psi_minus_theta") {
            return Ok(CanonicalState::PsiMinusTheta(t?));
        }
        if let Some(t) = with_theta("ghz_theta") {
            return Ok(CanonicalState::GhzTheta(t?));
        }
        match lower.as_str() {
            "phi_plus" => Ok(CanonicalState::PhiPlus),
            "psi_minus" => Ok(CanonicalState::PsiMinus),
            "ghz" => Ok(CanonicalState::Ghz),
            "h" => Ok(CanonicalState::H),
            "v" => Ok(CanonicalState::V),
            "d" => Ok(CanonicalState::D),
            _ => Err(Error::UnknownState(s.to_string())),
        }
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if !(-PI..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "phase {theta} outside [-pi, pi]"
        )));
    }
    Ok(())
}

/// Builds one of the named states with the first nonzero amplitude real positive.
pub fn canonical_state(which: CanonicalState) -> Result<StateVector> {
    let s = FRAC_1_SQRT_2;
    let zero = c(0.0, 0.0);
    let amps = match which {
        CanonicalState::PhiPlus => vec![c(s, 0.0), zero, zero, c(s, 0.0)],
        CanonicalState::PsiMinus => vec![zero, c(s, 0.0), c(-s, 0.0), zero],
        CanonicalState::PsiMinusTheta(t) => {
            check_angle(t)?;
            vec![zero, c(s, 0.0), -C64::from_polar(s, t), zero]
        }
        CanonicalState::Ghz => {
            let mut v = vec![zero; 8];
            v[0] = c(s, 0.0);
            v[7] = c(s, 0.0);
            v
        }
        CanonicalState::GhzTheta(t) => {
            check_angle(t)?;
            let mut v = vec![zero; 8];
            v[0] = c(s, 0.0);
            v[7] = C64::from_polar(s, t);
            v
        }
        CanonicalState::H => Polarization::H.amplitudes().to_vec(),
        CanonicalState::V => Polarization::V.amplitudes().to_vec(),
        CanonicalState::D => Polarization::D.amplitudes().to_vec(),
    };
    Ok(StateVector::new(amps)?.canonical_phase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, re: f64, im: f64) -> bool {
        (a - c(re, im)).norm() < 1e-15
    }

    #[test]
    fn phi_plus_amplitudes() {
        let phi = canonical_state(CanonicalState::PhiPlus).unwrap();
        let s = FRAC_1_SQRT_2;
        assert!(close(phi.amplitude(0), s, 0.0));
        assert!(close(phi.amplitude(1), 0.0, 0.0));
        assert!(close(phi.amplitude(2), 0.0, 0.0));
        assert!(close(phi.amplitude(3), s, 0.0));
    }

    #[test]
    fn psi_minus_theta_zero_is_singlet() {
        let a = canonical_state(CanonicalState::PsiMinusTheta(0.0)).unwrap();
        let b = canonical_state(CanonicalState::PsiMinus).unwrap();
        assert_eq!(a, b);
        assert!(close(a.amplitude(2), -FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn ghz_theta_pi_flips_sign() {
        let g = canonical_state(CanonicalState::GhzTheta(PI)).unwrap();
        assert!(close(g.amplitude(0), FRAC_1_SQRT_2, 0.0));
        assert!((g.amplitude(7) - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn names_round_trip_and_unknown_names_fail() {
        for name in ["phi_plus", "psi_minus", "ghz", "h", "v", "d", "ghz_theta(0.5)"] {
            let st: CanonicalState = name.parse().unwrap();
            assert_eq!(st.to_string(), name);
        }
        assert!(matches!(
            "bell".parse::<CanonicalState>(),
            Err(Error::UnknownState(_))
        ));
        assert!(canonical_state(CanonicalState::GhzTheta(4.0)).is_err());
    }

    #[test]
    fn analyzer_states_pair_up_orthogonally() {
        for p in Polarization::ALL {
            let a = polarization(p);
            let b = polarization(p.orthogonal());
            assert!(a.inner(&b).unwrap().norm() < 1e-15);
            assert_eq!(Polarization::from_symbol(p.symbol()), Some(p));
        }
    }
}
