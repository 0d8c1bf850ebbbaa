//! Random timestamp streams and an exhaustive pairing oracle.

use asyncswap::mc::{Channel, DetectionEvent, TimestampRecord, Truth};
use asyncswap::tdc::{FourfoldEvent, StopPolicy};
use rand::rngs::StdRng;
use rand::Rng;

pub fn random_streams(rng: &mut StdRng, span: i64, n: [usize; 4]) -> [Vec<i64>; 4] {
    n.map(|k| {
        let mut v: Vec<i64> = (0..k).map(|_| rng.gen_range(0..span)).collect();
        v.sort_unstable();
        v
    })
}

pub fn record_of(times: &[Vec<i64>; 4], span: i64) -> TimestampRecord {
    TimestampRecord::from_events(
        span,
        times.iter().enumerate().flat_map(|(c, ts)| {
            ts.iter().map(move |&t| (Channel::from_index(c).unwrap(), DetectionEvent { time: t, truth: Truth::Dark }))
        }),
    )
}

/// Every start against every stop.
pub fn brute_force(times: &[Vec<i64>; 4], tau_w: i64, policy: StopPolicy) -> Vec<FourfoldEvent> {
    let mut out = Vec::new();
    for (si, &s) in times[0].iter().enumerate() {
        let inside: Vec<Vec<usize>> = (1..4)
            .map(|c| (0..times[c].len()).filter(|&i| 2 * (times[c][i] - s).abs() <= tau_w).collect())
            .collect();
        if inside.iter().any(Vec::is_empty) {
            continue;
        }
        let pick = |c: usize| -> usize {
            let cand = &inside[c];
            match policy {
                StopPolicy::Earliest => *cand.iter().min_by_key(|&&i| (times[c + 1][i], i)).unwrap(),
                _ => *cand.iter().min_by_key(|&&i| ((times[c + 1][i] - s).abs(), times[c + 1][i], i)).unwrap(),
            }
        };
        let combos: Vec<[usize; 3]> = match policy {
            StopPolicy::AllPairs => {
                let mut v = Vec::new();
                for &i in &inside[0] {
                    for &j in &inside[1] {
                        for &k in &inside[2] {
                            v.push([i, j, k]);
                        }
                    }
                }
                v
            }
            _ => vec![[pick(0), pick(1), pick(2)]],
        };
        for stop_index in combos {
            out.push(FourfoldEvent {
                start: s,
                stops: [0, 1, 2].map(|c| times[c + 1][stop_index[c]]),
                start_index: si,
                stop_index,
                policy,
            });
        }
    }
    out
}
