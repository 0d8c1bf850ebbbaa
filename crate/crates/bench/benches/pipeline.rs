use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use asyncswap::tdc::{extract_streams, StopPolicy, Streams};
use asyncswap::tomography::{mle_reconstruct, settings, CountTable, MleOptions};
use asyncswap_bench::dense_record;

fn extraction(c: &mut Criterion) {
    let record = dense_record(1.0);
    let streams = Streams::from_record(&record);
    let mut g = c.benchmark_group("extract");
    g.throughput(Throughput::Elements(record.len() as u64));
    g.sample_size(20);
    for policy in [StopPolicy::Closest, StopPolicy::AllPairs] {
        for tau_w in [80, 1200] {
            g.bench_with_input(BenchmarkId::new(format!("{policy:?}"), tau_w), &tau_w, |b, &w| {
                b.iter(|| extract_streams(black_box(&streams), w, policy))
            });
        }
    }
    g.finish();
}

fn tomography(c: &mut Criterion) {
    // Counts of a slightly mixed singlet, 300 per setting on average.
    let counts: Vec<u64> = settings(2)
        .unwrap()
        .iter()
        .map(|s| {
            let (a, b) = (s.projectors[0], s.projectors[1]);
            if a == b { 15 } else if a.orthogonal() == b { 585 } else { 300 }
        })
        .collect();
    let table = CountTable::from_counts(2, counts).unwrap();
    c.bench_function("mle_two_qubit", |b| b.iter(|| mle_reconstruct(black_box(&table), &MleOptions::default())));
}

criterion_group!(benches, extraction, tomography);
criterion_main!(benches);
