//! Parallel-vs-sequential throughput of the hot loops: likelihood profiles
//! over dense phase grids, Fisher sweeps across N, and annealer sweeps.
//!
//! With the `parallel` feature (default) each workload runs once inside a
//! single-thread rayon pool and once on all available cores, so one report
//! shows the scaling. Building with `--no-default-features` benches the
//! compile-time sequential fallback instead.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mzsim::analysis::{sweep_fisher, StateFamily};
use mzsim::annealer::{run as anneal_run, AnnealerConfig};
use mzsim::estimation::likelihood_profile;
use mzsim::states;

#[cfg(feature = "parallel")]
fn pool_sizes() -> Vec<usize> {
    let cores = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
    if cores > 1 {
        vec![1, cores]
    } else {
        vec![1]
    }
}

#[cfg(feature = "parallel")]
fn with_pool<F: FnOnce() + Send>(threads: usize, work: F) {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(work);
}

#[cfg(not(feature = "parallel"))]
fn pool_sizes() -> Vec<usize> {
    vec![1]
}

#[cfg(not(feature = "parallel"))]
fn with_pool<F: FnOnce() + Send>(_threads: usize, work: F) {
    work();
}

fn bench_likelihood(c: &mut Criterion) {
    let state = states::gaussian_state(100, 1.7).unwrap();
    let mut group = c.benchmark_group("likelihood_profile_n100");
    for threads in pool_sizes() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            b.iter(|| {
                with_pool(t, || {
                    likelihood_profile(&state, 0.0, 10.0, 4096).unwrap();
                })
            })
        });
    }
    group.finish();
}

fn bench_fisher_sweep(c: &mut Criterion) {
    let n_list = [50usize, 100, 200, 400];
    // warm the per-N spectral caches so the bench measures the sweep itself
    sweep_fisher(&StateFamily::TwinFock, &n_list, 0.0).unwrap();
    let mut group = c.benchmark_group("fisher_sweep_gaussian");
    for threads in pool_sizes() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            b.iter(|| {
                with_pool(t, || {
                    sweep_fisher(&StateFamily::Gaussian { sigma_prime: 1.7 }, &n_list, 0.0)
                        .unwrap();
                })
            })
        });
    }
    group.finish();
}

fn bench_anneal(c: &mut Criterion) {
    let mut group = c.benchmark_group("anneal_n20_p64");
    group.sample_size(10);
    for threads in pool_sizes() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            b.iter(|| {
                with_pool(t, || {
                    let mut config = AnnealerConfig::new(20, 1);
                    config.max_iterations = 200;
                    anneal_run(config).unwrap();
                })
            })
        });
    }
    group.finish();
}

criterion_group! {
    name = throughput;
    config = Criterion::default()
        .sample_size(20)
        .measurement_time(Duration::from_secs(5))
        .warm_up_time(Duration::from_secs(1));
    targets = bench_likelihood, bench_fisher_sweep, bench_anneal
}
criterion_main!(throughput);
