//! Parallel versus sequential timing for the data-parallel inner loops:
//! rotation sort behind the transform, the answer-string oracle grid, and
//! the exhaustive disjointness sweep.
//!
//! Run with `cargo bench -p gram-core`. Build with
//! `--no-default-features` to time the sequential fallbacks alone (the
//! parallel benches then disappear).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gram_core::bitstring::BitString;
use gram_core::bwt;
use gram_core::grid::{self, PointSet};
use gram_core::hard::{self, BlockedInstance, SetInstance};
use gram_core::rng::DetRng;

fn random_bits(len: usize, seed: u64) -> BitString {
    let mut rng = DetRng::new(seed);
    BitString::from_bits((0..len).map(|_| rng.next_bool() as u8).collect())
}

fn bench_bwt(c: &mut Criterion) {
    let mut group = c.benchmark_group("bwt");
    let hard = bwt::build_bwt_hard(
        &BlockedInstance::new(4, 4, vec![2, 5, 9, 14]).unwrap(),
        1 << 20,
    )
    .unwrap();
    let random = random_bits(1 << 14, 1);
    for (name, input) in [("hard_b4_n4", &hard), ("random_16k", &random)] {
        group.bench_with_input(BenchmarkId::new("seq", name), input, |b, s| {
            b.iter(|| bwt::bwt_seq(black_box(s)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", name), input, |b, s| {
            b.iter(|| bwt::bwt_par(black_box(s)))
        });
    }
    group.finish();
}

fn bench_answer_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("answer_oracle");
    let mut rng = DetRng::new(2);
    // Small sits below the parallel dispatch threshold, large above it; the
    // pair shows the crossover.
    for (name, w, h) in [("small_512x256", 512, 256), ("large_2048x1024", 2048, 1024)] {
        let points: Vec<(usize, usize)> = (0..300)
            .map(|_| (rng.next_below(w) + 1, rng.next_below(h) + 1))
            .collect();
        let ps = PointSet::new(w, h, points).unwrap();
        group.bench_with_input(BenchmarkId::new("seq", name), &ps, |b, ps| {
            b.iter(|| grid::answer_oracle_seq(black_box(ps)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", name), &ps, |b, ps| {
            b.iter(|| grid::answer_oracle_par(black_box(ps)))
        });
    }
    group.finish();
}

fn bench_sd_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sd_exhaustive_check");
    group.sample_size(10);
    let inst = SetInstance::new(16, vec![1, 4, 6, 9, 13, 15]).unwrap();
    group.bench_function("seq", |b| {
        b.iter(|| hard::check_sd_encoding_seq(black_box(&inst)).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| {
        b.iter(|| hard::check_sd_encoding(black_box(&inst)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_bwt, bench_answer_oracle, bench_sd_sweep);
criterion_main!(benches);
