use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use decaylab::domain::Range;
use decaylab::engine::CompiledScenario;
use decaylab::sampling::{
    sample_abc_parameter, sample_truncated_normal, sample_weibull, RngStream,
};
use decaylab_bench::benchmark_scenario;

fn bench_samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("samplers");
    group.bench_function("truncated_normal", |b| {
        let mut rng = RngStream::new(1, 0);
        b.iter(|| {
            black_box(sample_truncated_normal(&mut rng, 50.0, 10.0, 0.0, 100.0).unwrap())
        })
    });
    group.bench_function("truncated_normal_narrow_window", |b| {
        let mut rng = RngStream::new(1, 1);
        b.iter(|| black_box(sample_truncated_normal(&mut rng, 0.0, 1.0, 8.0, 8.5).unwrap()))
    });
    group.bench_function("weibull", |b| {
        let mut rng = RngStream::new(1, 2);
        b.iter(|| black_box(sample_weibull(&mut rng, 1.0, 300.0).unwrap()))
    });
    group.bench_function("abc_parameter", |b| {
        let mut rng = RngStream::new(1, 3);
        b.iter(|| {
            black_box(sample_abc_parameter(&mut rng, Range::new(0.2, 0.6), 0.0, 1.0).unwrap())
        })
    });
    group.finish();
}

fn bench_engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine");
    group.sample_size(20);

    let small = CompiledScenario::new(&benchmark_scenario(100, 10)).unwrap();
    group.bench_function("simulate_run_100_agents", |b| {
        b.iter(|| black_box(small.simulate_run(0)))
    });

    let full = CompiledScenario::new(&benchmark_scenario(1000, 10)).unwrap();
    group.bench_function("simulate_run_1000_agents", |b| {
        b.iter(|| black_box(full.simulate_run(0)))
    });
    group.bench_function("ensemble_1000_agents_10_runs", |b| {
        b.iter(|| black_box(full.run_ensemble()))
    });
    group.finish();
}

criterion_group!(benches, bench_samplers, bench_engine);
criterion_main!(benches);
