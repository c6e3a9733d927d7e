//! Sequential vs data-parallel execution of the parallel hot spots.
//! Build with `--no-default-features` to measure the pure sequential fallback.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use emd_forecast::emd::{decompose, SiftingConfig};
use emd_forecast::features::select_inputs;
use emd_forecast::harness::{synth, SynthConfig};
use emd_forecast::par::{self, Execution};
use emd_forecast::pso::{tune_svr_with, KernelFamily, PsoConfig};
use emd_forecast::svr::SolverOptions;
use emd_forecast::EndConditionMethod;
use std::time::Duration;

fn policies() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel { workers: 0 }),
    ]
}

fn batch_decomposition(c: &mut Criterion) {
    let series = synth(&SynthConfig { count: 32, length: 256, period: 12, seed: 1 }).unwrap();
    let cfg = SiftingConfig::with_end_condition(EndConditionMethod::SlopeBased);
    let mut group = c.benchmark_group("decompose_32x256");
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.install(|| par::map(&series, |s| decompose(black_box(&s.series), &cfg).unwrap().n_imfs()))
            })
        });
    }
    group.finish();
}

fn lag_selection(c: &mut Criterion) {
    let s = synth(&SynthConfig { count: 1, length: 160, period: 12, seed: 2 }).unwrap();
    let values = s[0].series.values().to_vec();
    let mut group = c.benchmark_group("select_inputs_160");
    group.sample_size(10);
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.install(|| select_inputs(black_box(&values), 12, 3).unwrap()))
        });
    }
    group.finish();
}

fn swarm_search(c: &mut Criterion) {
    let s = synth(&SynthConfig { count: 1, length: 100, period: 12, seed: 4 }).unwrap();
    let v = s[0].series.values();
    let x: Vec<Vec<f64>> = (3..v.len()).map(|t| vec![v[t - 1], v[t - 2], v[t - 3]]).collect();
    let y: Vec<f64> = v[3..].to_vec();
    let cfg = PsoConfig { swarm_size: 10, iterations: 3, seed: 5, ..PsoConfig::default() };
    let opts = SolverOptions { max_iter_per_sample: 50, ..SolverOptions::search() };
    let mut group = c.benchmark_group("pso_10x3_cv10");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, exec) in policies() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.install(|| tune_svr_with(&x, &y, KernelFamily::Rbf, &cfg, 10, &opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, batch_decomposition, lag_selection, swarm_search);
criterion_main!(benches);
