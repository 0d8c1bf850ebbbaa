use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quantum::{polarization, tensor, Polarization, StateVector};

/// One analyzer state per analyzed mode, leftmost mode first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting {
    pub projectors: Vec<Polarization>,
}

impl MeasurementSetting {
    pub fn n_modes(&self) -> usize {
        self.projectors.len()
    }

    /// Position in the lexicographic H, V, D, A, R, L order.
    pub fn index(&self) -> usize {
        self.projectors.iter().fold(0, |acc, p| acc * 6 + *p as usize)
    }

    pub fn from_index(n_modes: usize, mut index: usize) -> Self {
        let mut projectors = vec![Polarization::H; n_modes];
        for slot in projectors.iter_mut().rev() {
            *slot = Polarization::ALL[index % 6];
            index /= 6;
        }
        Self { projectors }
    }

    pub fn label(&self) -> String {
        self.projectors.iter().map(|p| p.symbol()).collect()
    }

    /// The product state this setting projects onto.
    pub fn state(&self) -> StateVector {
        let mut it = self.projectors.iter().map(|p| polarization(*p));
        let first = it.next().expect("settings analyze at least one mode");
        it.fold(first, |acc, s| tensor(&acc, &s))
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let projectors = s
            .chars()
            .map(|ch| Polarization::from_symbol(ch).ok_or_else(|| Error::Parse(format!("bad setting label `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if projectors.is_empty() {
            return Err(Error::Parse("empty setting label".into()));
        }
        Ok(Self { projectors })
    }
}

/// All 6ⁿ product settings in lexicographic order, `n ∈ {2, 3}`.
pub fn settings(n_modes: usize) -> Result<Vec<MeasurementSetting>> {
    if !(2..=3).contains(&n_modes) {
        return Err(Error::InvalidArgument(format!("tomography of {n_modes} modes is not supported")));
    }
    Ok((0..6usize.pow(n_modes as u32)).map(|i| MeasurementSetting::from_index(n_modes, i)).collect())
}
