//! Parallel vs sequential Monte Carlo collection, and the dense backend's
//! per-iteration cost.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use amploop::geometry::ProblemParams;
use amploop::runners::{Algorithm, RunConfig};
use amploop::stats;

fn bench_weak_collection(c: &mut Criterion) {
    let params = ProblemParams::with_auto_kappa(1e-4).unwrap();
    let cfg = RunConfig::angle(params, 99);
    let mut group = c.benchmark_group("weak_monte_carlo");
    for &trials in &[256u64, 2048] {
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| stats::monte_carlo(Algorithm::Weak, &cfg, t).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| stats::monte_carlo_sequential(Algorithm::Weak, &cfg, t).unwrap())
        });
    }
    group.finish();
}

fn bench_restart_collection(c: &mut Criterion) {
    let params = ProblemParams::with_auto_kappa(1e-4).unwrap();
    let cfg = RunConfig::angle(params, 99);
    let mut group = c.benchmark_group("test_restart_monte_carlo");
    for &trials in &[1024u64, 8192] {
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| stats::monte_carlo(Algorithm::TestRestart, &cfg, t).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| stats::monte_carlo_sequential(Algorithm::TestRestart, &cfg, t).unwrap())
        });
    }
    group.finish();
}

fn bench_statevector_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector_weak");
    for &n in &[64usize, 256] {
        let params = ProblemParams::with_auto_kappa(1.0 / n as f64).unwrap();
        let cfg = RunConfig::statevector(params, 7, n, vec![0]);
        group.bench_with_input(BenchmarkId::new("parallel", n), &cfg, |b, cfg| {
            b.iter(|| stats::monte_carlo(Algorithm::Weak, cfg, 32).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &cfg, |b, cfg| {
            b.iter(|| stats::monte_carlo_sequential(Algorithm::Weak, cfg, 32).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_weak_collection,
    bench_restart_collection,
    bench_statevector_trials
);
criterion_main!(benches);
