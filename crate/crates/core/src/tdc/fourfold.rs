use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::histogram::check_sorted;
use crate::error::{Error, Result};
use crate::mc::{is_genuine_fourfold, Channel, CoincidenceTruth, TimestampRecord};

const STOPS: [Channel; 3] = [Channel::D2, Channel::D3, Channel::D4];

/// How one stop is chosen when several fall inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopPolicy {
    /// Smallest `|stop − start|`, the earlier one on ties.
    #[default]
    Closest,
    Earliest,
    /// One event per combination of in-window stops.
    AllPairs,
}

impl FromStr for StopPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closest" => Ok(StopPolicy::Closest),
            "earliest" => Ok(StopPolicy::Earliest),
            "all-pairs" => Ok(StopPolicy::AllPairs),
            _ => Err(Error::Config(format!("unknown stop policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourfoldEvent {
    pub start: i64,
    /// D2, D3, D4 stop times.
    pub stops: [i64; 3],
    /// Index of the start in the D1 stream.
    pub start_index: usize,
    /// Indices of the chosen stops in the D2, D3, D4 streams.
    pub stop_index: [usize; 3],
    pub policy: StopPolicy,
}

/// Sorted per-channel timestamps, borrowed or extracted from a record.
pub struct Streams {
    pub times: [Vec<i64>; 4],
}

impl Streams {
    pub fn from_record(record: &TimestampRecord) -> Self {
        Self { times: Channel::ALL.map(|c| record.times(c)) }
    }

    pub fn new(times: [Vec<i64>; 4]) -> Result<Self> {
        for (i, t) in times.iter().enumerate() {
            check_sorted(t, i + 1)?;
        }
        Ok(Self { times })
    }
}

fn check_window(tau_w: i64) -> Result<()> {
    if tau_w <= 0 {
        return Err(Error::InvalidArgument(format!("window must be positive, got {tau_w} ps")));
    }
    Ok(())
}

/// Stop `t` is inside the window of start `s` when `|t − s| ≤ τ_w/2`.
#[inline]
fn inside(t: i64, s: i64, tau_w: i64) -> bool {
    2 * (t - s).abs() <= tau_w
}

/// Four-folds on already validated streams. One pass over every channel.
pub fn extract_streams(streams: &Streams, tau_w: i64, policy: StopPolicy) -> Vec<FourfoldEvent> {
    let [d1, d2, d3, d4] = &streams.times;
    let stops = [d2.as_slice(), d3.as_slice(), d4.as_slice()];
    let mut lo = [0usize; 3];
    let mut out = Vec::new();
    let mut ranges = [(0usize, 0usize); 3];
    'starts: for (si, &s) in d1.iter().enumerate() {
        for c in 0..3 {
            let st = stops[c];
            let mut l = lo[c];
            while l < st.len() && 2 * (s - st[l]) > tau_w {
                l += 1;
            }
            lo[c] = l;
            let mut h = l;
            while h < st.len() && inside(st[h], s, tau_w) {
                h += 1;
            }
            if h == l {
                continue 'starts;
            }
            ranges[c] = (l, h);
        }
        match policy {
            StopPolicy::Closest | StopPolicy::Earliest => {
                let mut stop_index = [0usize; 3];
                for c in 0..3 {
                    let (l, h) = ranges[c];
                    stop_index[c] = if policy == StopPolicy::Earliest {
                        l
                    } else {
                        (l..h).min_by_key(|&i| ((stops[c][i] - s).abs(), i)).unwrap()
                    };
                }
                out.push(FourfoldEvent {
                    start: s,
                    stops: [0, 1, 2].map(|c| stops[c][stop_index[c]]),
                    start_index: si,
                    stop_index,
                    policy,
                });
            }
            StopPolicy::AllPairs => {
                for i in ranges[0].0..ranges[0].1 {
                    for j in ranges[1].0..ranges[1].1 {
                        for k in ranges[2].0..ranges[2].1 {
                            let stop_index = [i, j, k];
                            out.push(FourfoldEvent {
                                start: s,
                                stops: [0, 1, 2].map(|c| stops[c][stop_index[c]]),
                                start_index: si,
                                stop_index,
                                policy,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn extract_fourfolds_with(record: &TimestampRecord, tau_w: i64, policy: StopPolicy) -> Result<Vec<FourfoldEvent>> {
    check_window(tau_w)?;
    Ok(extract_streams(&Streams::from_record(record), tau_w, policy))
}

/// Four-fold coincidences with the closest-stop policy.
pub fn extract_fourfolds(record: &TimestampRecord, tau_w: i64) -> Result<Vec<FourfoldEvent>> {
    extract_fourfolds_with(record, tau_w, StopPolicy::Closest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub tau_w: i64,
    pub events: Vec<FourfoldEvent>,
}

impl WindowResult {
    pub fn count(&self) -> usize {
        self.events.len()
    }
}

/// Extraction at each window of an ascending list, sharing the streams.
pub fn sweep_windows(record: &TimestampRecord, windows: &[i64], policy: StopPolicy) -> Result<Vec<WindowResult>> {
    if windows.is_empty() {
        return Err(Error::InvalidArgument("empty window list".into()));
    }
    if windows.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("windows must be sorted ascending".into()));
    }
    for &w in windows {
        check_window(w)?;
    }
    let streams = Streams::from_record(record);
    Ok(windows
        .par_iter()
        .map(|&tau_w| WindowResult { tau_w, events: extract_streams(&streams, tau_w, policy) })
        .collect())
}

/// Splits four-folds into genuine four-photon events and accidentals.
pub fn classify_fourfolds(record: &TimestampRecord, events: &[FourfoldEvent]) -> CoincidenceTruth {
    let mut out = CoincidenceTruth::default();
    let d1 = record.channel(Channel::D1);
    let stop = STOPS.map(|c| record.channel(c));
    for e in events {
        let [t2, t3, t4] = [0, 1, 2].map(|c| stop[c][e.stop_index[c]].truth);
        if is_genuine_fourfold(d1[e.start_index].truth, t2, t3, t4) {
            out.genuine += 1;
        } else {
            out.accidental += 1;
        }
    }
    out
}

/// `start_ps,d2_ps,d3_ps,d4_ps`, one line per event.
pub fn write_fourfolds<W: Write>(events: &[FourfoldEvent], mut w: W) -> io::Result<()> {
    writeln!(w, "start_ps,d2_ps,d3_ps,d4_ps")?;
    for e in events {
        writeln!(w, "{},{},{},{}", e.start, e.stops[0], e.stops[1], e.stops[2])?;
    }
    Ok(())
}
