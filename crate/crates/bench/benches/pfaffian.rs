use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use onetwo_core::lattice::{build_decorated, build_torus};
use onetwo_core::pfaffian::{correlation_limit, kasteleyn_orient, Grid};
use onetwo_core::{ModelParams, SkewMatrix};

fn dense_pfaffian(c: &mut Criterion) {
    let mut group = c.benchmark_group("pfaffian");
    for m in [16, 64, 256] {
        let mut state = 0x9e37_79b9_7f4a_7c15_u64;
        let a = SkewMatrix::from_upper(m, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        });
        group.bench_with_input(BenchmarkId::from_parameter(m), &a, |b, a| {
            b.iter(|| black_box(a).log_pfaffian().unwrap())
        });
    }
    group.finish();
}

fn partition(c: &mut Criterion) {
    let p = ModelParams::new(1.3, 0.7, 1.1).unwrap();
    let mut group = c.benchmark_group("ln_partition");
    group.sample_size(10);
    for n in [4, 6, 8] {
        let sys =
            kasteleyn_orient(&build_decorated(&build_torus(n).unwrap(), &p).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &sys, |b, sys| {
            b.iter(|| sys.ln_partition().unwrap())
        });
    }
    group.finish();
}

fn limit(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlation_limit");
    group.sample_size(10);
    for a in [2.0, 6.0] {
        let p = ModelParams::new(a, 1.0, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(a), &p, |b, p| {
            b.iter(|| correlation_limit(p, 12, Grid::HalfOffset).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dense_pfaffian, partition, limit);
criterion_main!(benches);
