use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use std::hint::black_box;

use signeq::density::{SignFunction, main_theorem_experiment};
use signeq::qseries::{MulKernel, delta_with, theta};
use signeq::satotate::st_sample_with;
use signeq::shimura::{delta_lifted, delta_preimage_squares, ShimuraParams};
use signeq::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("qseries");
    g.sample_size(10);
    let th = theta(20_000);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("theta_sq_sparse", name), &exec, |b, &e| {
            b.iter(|| th.mul_with(black_box(&th), MulKernel::Sparse, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("delta_20000", name), &exec, |b, &e| b.iter(|| delta_with(black_box(20_000), e)));
    }
    g.finish();
}

fn lift(c: &mut Criterion) {
    let mut g = c.benchmark_group("shimura");
    g.sample_size(10);
    let tau = delta_lifted(50_000, Execution::Parallel);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("invert_lift_50000", name), &exec, |b, &e| {
            b.iter(|| delta_preimage_squares(black_box(tau.coeffs()), 50_000, e).unwrap())
        });
    }
    g.finish();
}

fn statistics(c: &mut Criterion) {
    let mut g = c.benchmark_group("statistics");
    g.sample_size(10);
    let tau = delta_lifted(100_000, Execution::Parallel);
    let a_sq = delta_preimage_squares(tau.coeffs(), 100_000, Execution::Parallel).unwrap();
    let f = SignFunction::from_square_class(&ShimuraParams::delta_preimage(), &a_sq).unwrap();
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("st_sample_1e6", name), &exec, |b, &e| b.iter(|| st_sample_with(7, 1_000_000, e)));
        g.bench_with_input(BenchmarkId::new("class_counts_1e5", name), &exec, |b, &e| {
            b.iter(|| main_theorem_experiment(&f, 5, 1, 100_000, &[0.01], e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, series, lift, statistics);
criterion_main!(benches);
