use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::SourceLabel;

pub const N_CHANNELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Channel {
    D1,
    D2,
    D3,
    D4,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::D1, Channel::D2, Channel::D3, Channel::D4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    Stray,
    Dark,
    Pair { source: SourceLabel, pair_id: u64 },
}

impl Truth {
    pub fn tag(self) -> u8 {
        match self {
            Truth::Stray => 0,
            Truth::Dark => 1,
            Truth::Pair { source: SourceLabel::A, .. } => 2,
            Truth::Pair { source: SourceLabel::B, .. } => 3,
        }
    }

    pub fn pair_id(self) -> u64 {
        match self {
            Truth::Pair { pair_id, .. } => pair_id,
            _ => 0,
        }
    }

    pub fn from_tag(tag: u8, pair_id: u64) -> Option<Self> {
        match tag {
            0 => Some(Truth::Stray),
            1 => Some(Truth::Dark),
            2 => Some(Truth::Pair { source: SourceLabel::A, pair_id }),
            3 => Some(Truth::Pair { source: SourceLabel::B, pair_id }),
            _ => None,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truth::Stray => f.write_str("stray"),
            Truth::Dark => f.write_str("dark"),
            Truth::Pair { source, pair_id } => write!(f, "pair:{source:?}:{pair_id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionEvent {
    pub time: i64,
    pub truth: Truth,
}

/// Detection streams of one run, one time-sorted stream per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestampRecord {
    pub duration_ps: i64,
    pub digest: [u8; 32],
    /// Free-form `key = value` run metadata (seed, RNG, generation mode, ...).
    pub meta: BTreeMap<String, String>,
    channels: [Vec<DetectionEvent>; N_CHANNELS],
}

impl TimestampRecord {
    /// Fails with [`Error::Unsorted`] if a stream is not sorted by time.
    pub fn new(
        duration_ps: i64,
        digest: [u8; 32],
        meta: BTreeMap<String, String>,
        channels: [Vec<DetectionEvent>; N_CHANNELS],
    ) -> Result<Self> {
        for (i, ch) in channels.iter().enumerate() {
            if ch.windows(2).any(|w| w[0].time > w[1].time) {
                return Err(Error::Unsorted(i + 1));
            }
        }
        Ok(Self { duration_ps, digest, meta, channels })
    }

    /// Builds a record from unordered events; streams are sorted stably by time.
    pub fn from_events(
        duration_ps: i64,
        events: impl IntoIterator<Item = (Channel, DetectionEvent)>,
    ) -> Self {
        let mut channels: [Vec<DetectionEvent>; N_CHANNELS] = Default::default();
        for (ch, ev) in events {
            channels[ch.index()].push(ev);
        }
        for ch in &mut channels {
            ch.sort_by_key(|e| e.time);
        }
        Self { duration_ps, digest: [0; 32], meta: BTreeMap::new(), channels }
    }

    pub fn channel(&self, ch: Channel) -> &[DetectionEvent] {
        &self.channels[ch.index()]
    }

    pub fn times(&self, ch: Channel) -> Vec<i64> {
        self.channel(ch).iter().map(|e| e.time).collect()
    }

    pub fn channels(&self) -> &[Vec<DetectionEvent>; N_CHANNELS] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn meta_parse<T: std::str::FromStr>(&self, key: &str) -> Option<T> {
        self.meta_value(key).and_then(|v| v.parse().ok())
    }

    /// Drops every event that follows a kept event on the same channel by
    /// less than `dead_time_ps`.
    pub fn apply_dead_time(&mut self, dead_time_ps: i64) {
        if dead_time_ps <= 0 {
            return;
        }
        for ch in &mut self.channels {
            let mut last = i64::MIN;
            ch.retain(|e| {
                if e.time.saturating_sub(last) < dead_time_ps {
                    false
                } else {
                    last = e.time;
                    true
                }
            });
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelTruth {
    pub pair_a: u64,
    pub pair_b: u64,
    pub stray: u64,
    pub dark: u64,
}

impl ChannelTruth {
    pub fn total(&self) -> u64 {
        self.pair_a + self.pair_b + self.stray + self.dark
    }
}

impl AddAssign for ChannelTruth {
    fn add_assign(&mut self, o: Self) {
        self.pair_a += o.pair_a;
        self.pair_b += o.pair_b;
        self.stray += o.stray;
        self.dark += o.dark;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthSummary {
    pub channels: [ChannelTruth; N_CHANNELS],
}

impl Add for GroundTruthSummary {
    type Output = Self;

    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.channels.iter_mut().zip(o.channels) {
            *a += b;
        }
        self
    }
}

pub fn ground_truth_report(record: &TimestampRecord) -> GroundTruthSummary {
    let mut out = GroundTruthSummary::default();
    for (slot, events) in out.channels.iter_mut().zip(record.channels()) {
        for e in events {
            match e.truth {
                Truth::Stray => slot.stray += 1,
                Truth::Dark => slot.dark += 1,
                Truth::Pair { source: SourceLabel::A, .. } => slot.pair_a += 1,
                Truth::Pair { source: SourceLabel::B, .. } => slot.pair_b += 1,
            }
        }
    }
    out
}

/// Split of a set of four-fold coincidences into true four-photon events and
/// accidentals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceTruth {
    pub genuine: u64,
    pub accidental: u64,
}

/// A four-fold is genuine when D1 and D2 come from an A and a B pair and the
/// two stops on D3, D4 are exactly those pairs' idler photons.
pub fn is_genuine_fourfold(d1: Truth, d2: Truth, d3: Truth, d4: Truth) -> bool {
    let (Truth::Pair { source: SourceLabel::A, pair_id: a }, Truth::Pair { source: SourceLabel::B, pair_id: b }) =
        (d1, d2)
    else {
        return false;
    };
    let id = |t: Truth| match t {
        Truth::Pair { source, pair_id } => Some((source, pair_id)),
        _ => None,
    };
    let want_a = Some((SourceLabel::A, a));
    let want_b = Some((SourceLabel::B, b));
    (id(d3) == want_a && id(d4) == want_b) || (id(d3) == want_b && id(d4) == want_a)
}
