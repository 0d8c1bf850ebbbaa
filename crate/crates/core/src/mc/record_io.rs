//! Binary and text forms of a [`TimestampRecord`].
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic        8  b"TSRECORD"
//! version      2  u16 = 1
//! channels     1  u8 = 4
//! reserved     1
//! duration_ps  8  i64
//! digest      32  sha256 of the generating configuration
//! meta_len     4  u32, then meta_len bytes of UTF-8 `key=value` lines
//! event_count  8  u64
//! events      18  each: channel u8 (0..4), time i64, truth tag u8, pair_id u64
//! ```
//!
//! Events are grouped by channel and time-sorted within a channel.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::record::{Channel, DetectionEvent, TimestampRecord, Truth, N_CHANNELS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"TSRECORD";
pub const VERSION: u16 = 1;
const EVENT_BYTES: usize = 18;

pub fn write_record<W: Write>(record: &TimestampRecord, w: W) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[N_CHANNELS as u8, 0])?;
    w.write_all(&record.duration_ps.to_le_bytes())?;
    w.write_all(&record.digest)?;
    let mut meta = String::new();
    for (k, v) in &record.meta {
        let _ = writeln!(meta, "{k}={v}");
    }
    w.write_all(&(meta.len() as u32).to_le_bytes())?;
    w.write_all(meta.as_bytes())?;
    w.write_all(&(record.len() as u64).to_le_bytes())?;
    let mut buf = [0u8; EVENT_BYTES];
    for (ch, events) in record.channels().iter().enumerate() {
        for e in events {
            buf[0] = ch as u8;
            buf[1..9].copy_from_slice(&e.time.to_le_bytes());
            buf[9] = e.truth.tag();
            buf[10..18].copy_from_slice(&e.truth.pair_id().to_le_bytes());
            w.write_all(&buf)?;
        }
    }
    w.flush()
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptRecord(msg.into())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => corrupt(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

pub fn read_record<R: Read>(r: R) -> Result<TimestampRecord> {
    let mut r = BufReader::new(r);
    let mut head = [0u8; 52];
    read_exact(&mut r, &mut head, "header")?;
    if &head[0..8] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u16::from_le_bytes([head[8], head[9]]);
    if version != VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    if head[10] as usize != N_CHANNELS {
        return Err(corrupt(format!("expected {N_CHANNELS} channels, found {}", head[10])));
    }
    let duration_ps = i64::from_le_bytes(head[12..20].try_into().unwrap());
    let digest: [u8; 32] = head[20..52].try_into().unwrap();

    let mut len = [0u8; 4];
    read_exact(&mut r, &mut len, "metadata length")?;
    let mut meta_bytes = vec![0u8; u32::from_le_bytes(len) as usize];
    read_exact(&mut r, &mut meta_bytes, "metadata")?;
    let meta_text = String::from_utf8(meta_bytes).map_err(|_| corrupt("metadata is not UTF-8"))?;
    let mut meta = BTreeMap::new();
    for line in meta_text.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| corrupt(format!("bad metadata line `{line}`")))?;
        meta.insert(k.to_string(), v.to_string());
    }

    let mut count = [0u8; 8];
    read_exact(&mut r, &mut count, "event count")?;
    let count = u64::from_le_bytes(count);
    let mut channels: [Vec<DetectionEvent>; N_CHANNELS] = Default::default();
    let mut buf = [0u8; EVENT_BYTES];
    for i in 0..count {
        read_exact(&mut r, &mut buf, &format!("event {i}"))?;
        let ch = buf[0] as usize;
        if ch >= N_CHANNELS {
            return Err(corrupt(format!("event {i}: channel {ch}")));
        }
        let time = i64::from_le_bytes(buf[1..9].try_into().unwrap());
        let pair_id = u64::from_le_bytes(buf[10..18].try_into().unwrap());
        let truth = Truth::from_tag(buf[9], pair_id)
            .ok_or_else(|| corrupt(format!("event {i}: truth tag {}", buf[9])))?;
        channels[ch].push(DetectionEvent { time, truth });
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(corrupt("trailing bytes after events"));
    }
    TimestampRecord::new(duration_ps, digest, meta, channels).map_err(|e| match e {
        Error::Unsorted(ch) => corrupt(format!("channel D{ch} is not time-sorted")),
        other => other,
    })
}

pub fn save_record(record: &TimestampRecord, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_record(record, f)?;
    Ok(())
}

pub fn load_record(path: &Path) -> Result<TimestampRecord> {
    read_record(std::fs::File::open(path)?)
}

/// One event per line, `channel,time_ps,truth`, channel-major.
pub fn write_record_text<W: Write>(record: &TimestampRecord, w: W) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "channel,time_ps,truth")?;
    for ch in Channel::ALL {
        for e in record.channel(ch) {
            writeln!(w, "{ch},{},{}", e.time, e.truth)?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::SourceLabel;

    fn sample() -> TimestampRecord {
        let mut rec = TimestampRecord::from_events(
            1_000,
            [
                (Channel::D1, DetectionEvent { time: 10, truth: Truth::Pair { source: SourceLabel::A, pair_id: 3 } }),
                (Channel::D4, DetectionEvent { time: -2, truth: Truth::Dark }),
                (Channel::D4, DetectionEvent { time: 999, truth: Truth::Stray }),
            ],
        );
        rec.meta.insert("seed".into(), "42".into());
        rec.digest = [7; 32];
        rec
    }

    #[test]
    fn binary_round_trip() {
        let rec = sample();
        let mut bytes = Vec::new();
        write_record(&rec, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 52 + 4 + "seed=42\n".len() + 8 + 3 * EVENT_BYTES);
        assert_eq!(read_record(bytes.as_slice()).unwrap(), rec);
    }

    #[test]
    fn detects_corruption() {
        let mut bytes = Vec::new();
        write_record(&sample(), &mut bytes).unwrap();
        assert!(matches!(read_record(&bytes[..bytes.len() - 1]), Err(Error::CorruptRecord(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_record(bad.as_slice()), Err(Error::CorruptRecord(_))));
        let mut extra = bytes;
        extra.push(0);
        assert!(matches!(read_record(extra.as_slice()), Err(Error::CorruptRecord(_))));
    }

    #[test]
    fn text_export() {
        let mut out = Vec::new();
        write_record_text(&sample(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "channel,time_ps,truth\nD1,10,pair:A:3\nD4,-2,dark\nD4,999,stray\n");
    }
}
