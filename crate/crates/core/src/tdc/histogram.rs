use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mc::{Channel, TimestampRecord};

/// Counts of `stop − start` differences in `[−range, +range]`.
///
/// Bin `k` covers `[−range + k·bin_width, −range + (k+1)·bin_width)`; the
/// last bin is clipped at `+range`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartStopHistogram {
    pub bin_width: i64,
    pub range: i64,
    pub counts: Vec<u64>,
}

impl StartStopHistogram {
    pub fn new(bin_width: i64, range: i64) -> Result<Self> {
        if bin_width <= 0 || range < 0 {
            return Err(Error::InvalidArgument(format!(
                "histogram needs bin_width > 0 and range >= 0, got {bin_width} and {range}"
            )));
        }
        let n = (2 * range + 1 + bin_width - 1) / bin_width;
        Ok(Self { bin_width, range, counts: vec![0; n as usize] })
    }

    pub fn bin_of(&self, dt: i64) -> Option<usize> {
        if dt.abs() > self.range {
            return None;
        }
        Some(((dt + self.range) / self.bin_width) as usize)
    }

    pub fn lower_edge(&self, bin: usize) -> i64 {
        -self.range + bin as i64 * self.bin_width
    }

    /// Midpoint of the integer differences that fall in `bin`.
    pub fn center(&self, bin: usize) -> f64 {
        let lo = self.lower_edge(bin);
        let hi = (lo + self.bin_width - 1).min(self.range);
        (lo + hi) as f64 / 2.0
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts with `|dt| ≤ half_width`, for bins entirely inside that range.
    pub fn sum_within(&self, half_width: i64) -> u64 {
        (0..self.counts.len())
            .filter(|&k| {
                let lo = self.lower_edge(k);
                let hi = (lo + self.bin_width - 1).min(self.range);
                lo >= -half_width && hi <= half_width
            })
            .map(|k| self.counts[k])
            .sum()
    }

    /// `dt_ps,count` with `dt_ps` the lower bin edge.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "dt_ps,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{c}", self.lower_edge(k))?;
        }
        Ok(())
    }

    /// Inverse of [`write_text`](Self::write_text).
    pub fn parse_text(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Parse(format!("histogram: {m}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some("dt_ps,count") {
            return Err(bad("missing `dt_ps,count` header".into()));
        }
        let mut rows = Vec::new();
        for line in lines {
            let (dt, c) = line.split_once(',').ok_or_else(|| bad(format!("bad row `{line}`")))?;
            let dt: i64 = dt.trim().parse().map_err(|_| bad(format!("bad edge `{dt}`")))?;
            let c: u64 = c.trim().parse().map_err(|_| bad(format!("bad count `{c}`")))?;
            rows.push((dt, c));
        }
        let Some(&(first, _)) = rows.first() else {
            return Err(bad("no bins".into()));
        };
        let range = -first;
        let bin_width = match rows.get(1) {
            Some(&(second, _)) => second - first,
            None => 2 * range + 1,
        };
        let mut h = Self::new(bin_width, range).map_err(|e| bad(e.to_string()))?;
        if h.counts.len() != rows.len() || rows.iter().enumerate().any(|(k, r)| r.0 != h.lower_edge(k)) {
            return Err(bad("bin edges are not evenly spaced from -range to +range".into()));
        }
        h.counts = rows.into_iter().map(|r| r.1).collect();
        Ok(h)
    }
}

pub(crate) fn check_sorted(times: &[i64], channel: usize) -> Result<()> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        Err(Error::Unsorted(channel))
    } else {
        Ok(())
    }
}

/// Histogram of all stop−start differences within `±range`, via one
/// two-index sweep.
pub fn histogram_times(starts: &[i64], stops: &[i64], bin_width: i64, range: i64) -> Result<StartStopHistogram> {
    check_sorted(starts, 1)?;
    check_sorted(stops, 2)?;
    let mut h = StartStopHistogram::new(bin_width, range)?;
    let mut lo = 0;
    for &s in starts {
        while lo < stops.len() && stops[lo] < s - range {
            lo += 1;
        }
        for &t in stops[lo..].iter().take_while(|&&t| t <= s + range) {
            h.counts[((t - s + range) / bin_width) as usize] += 1;
        }
    }
    Ok(h)
}

pub fn start_stop_histogram(
    record: &TimestampRecord,
    start: Channel,
    stop: Channel,
    bin_width: i64,
    range: i64,
) -> Result<StartStopHistogram> {
    if start == stop {
        return Err(Error::InvalidArgument("start and stop channels must differ".into()));
    }
    histogram_times(&record.times(start), &record.times(stop), bin_width, range)
}
