use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Add;

use super::settings::{settings, MeasurementSetting};
use crate::error::{Error, Result};

/// Four-fold counts for every setting of an `n`-mode tomography.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    n_modes: usize,
    counts: Vec<u64>,
    pub tau_w_ps: Option<i64>,
    pub duration_s: Option<f64>,
    /// Hex digest of the configuration that produced the counts.
    pub digest: Option<String>,
}

impl CountTable {
    pub fn zeros(n_modes: usize) -> Result<Self> {
        let len = settings(n_modes)?.len();
        Ok(Self { n_modes, counts: vec![0; len], tau_w_ps: None, duration_s: None, digest: None })
    }

    /// Counts in lexicographic setting order.
    pub fn from_counts(n_modes: usize, counts: Vec<u64>) -> Result<Self> {
        let mut t = Self::zeros(n_modes)?;
        if counts.len() != t.counts.len() {
            return Err(Error::DimensionMismatch { expected: t.counts.len(), got: counts.len() });
        }
        t.counts = counts;
        Ok(t)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, s: &MeasurementSetting) -> u64 {
        self.counts[s.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn write_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n_modes = {}", self.n_modes);
        if let Some(w) = self.tau_w_ps {
            let _ = writeln!(out, "tau_w_ps = {w}");
        }
        if let Some(d) = self.duration_s {
            let _ = writeln!(out, "duration_s = {d}");
        }
        if let Some(d) = &self.digest {
            let _ = writeln!(out, "digest = {d}");
        }
        let _ = writeln!(out, "setting,count");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{c}", MeasurementSetting::from_index(self.n_modes, i));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut header = BTreeMap::new();
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        for line in lines.by_ref() {
            if line == "setting,count" {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad count-table header line `{line}`")))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        }
        let n_modes: usize = header
            .get("n_modes")
            .ok_or_else(|| Error::Parse("count table lacks `n_modes`".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("n_modes: {e}")))?;
        let mut table = Self::zeros(n_modes).map_err(|e| Error::Parse(e.to_string()))?;
        let mut seen = vec![false; table.counts.len()];
        for line in lines {
            let (label, count) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad count line `{line}`")))?;
            let s: MeasurementSetting = label.trim().parse()?;
            if s.n_modes() != n_modes {
                return Err(Error::Parse(format!("setting `{label}` does not analyze {n_modes} modes")));
            }
            let i = s.index();
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Parse(format!("duplicate setting `{label}`")));
            }
            table.counts[i] = count.trim().parse().map_err(|e| Error::Parse(format!("count of {label}: {e}")))?;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!("missing setting `{}`", MeasurementSetting::from_index(n_modes, i))));
        }
        table.tau_w_ps = header.get("tau_w_ps").map(|v| v.parse()).transpose().map_err(|e| Error::Parse(format!("tau_w_ps: {e}")))?;
        table.duration_s = header.get("duration_s").map(|v| v.parse()).transpose().map_err(|e| Error::Parse(format!("duration_s: {e}")))?;
        table.digest = header.get("digest").cloned();
        Ok(table)
    }
}

impl Add for &CountTable {
    type Output = Result<CountTable>;

    fn add(self, o: &CountTable) -> Result<CountTable> {
        if self.n_modes != o.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, got: o.n_modes });
        }
        let mut out = self.clone();
        for (a, b) in out.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        out.duration_s = self.duration_s.zip(o.duration_s).map(|(a, b)| a + b);
        Ok(out)
    }
}

/// Builds a table from events grouped by setting. Every setting must appear
/// exactly once.
pub fn accumulate<'a, T: 'a>(
    n_modes: usize,
    groups: impl IntoIterator<Item = (&'a MeasurementSetting, &'a [T])>,
) -> Result<CountTable> {
    let mut table = CountTable::zeros(n_modes)?;
    let mut seen = vec![false; table.counts.len()];
    for (s, events) in groups {
        if s.n_modes() != n_modes {
            return Err(Error::InvalidArgument(format!("setting `{s}` does not analyze {n_modes} modes")));
        }
        let i = s.index();
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidArgument(format!("setting `{s}` listed twice")));
        }
        table.counts[i] = events.len() as u64;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidArgument(format!(
            "missing setting `{}`",
            MeasurementSetting::from_index(n_modes, i)
        )));
    }
    Ok(table)
}
