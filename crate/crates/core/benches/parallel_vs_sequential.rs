//! Data-parallel versus single-threaded execution of the heavy kernels.
//!
//! The sequential variant runs the same code inside a one-thread rayon
//! pool. Building with `--no-default-features` removes rayon altogether.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;

use mobicache::coloring::{color_cells, verify_coloring};
use mobicache::mobility_sim::{simulate_offloading, MobilityModel, SimConfig};
use mobicache::popularity::{expected_rate_monte_carlo, zipf_profile, SystemParams};
use mobicache::topology::{Boundary, CellGrid};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        (
            "sequential",
            rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
        ),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn coloring_check(c: &mut Criterion) {
    let grid = CellGrid::square(12, 12, Boundary::TORUS).unwrap();
    let coloring = color_cells(&grid, 4).unwrap();
    let mut group = c.benchmark_group("verify_coloring_sq12x12_T4");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| verify_coloring(&grid, &coloring, 4)))
        });
    }
    group.finish();
}

fn offloading(c: &mut Criterion) {
    let grid = CellGrid::square(4, 6, Boundary::Bounded).unwrap();
    let coloring = color_cells(&grid, 4).unwrap();
    let config = SimConfig {
        grid,
        path_length: 4,
        capacity: 20,
        density: 1.75,
        trials: 200,
        seed: 7,
        relaxed: false,
        model: MobilityModel::default(),
    };
    let mut group = c.benchmark_group("simulate_offloading_200_trials");
    group.sample_size(20);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| simulate_offloading(&config, &coloring).unwrap()))
        });
    }
    group.finish();
}

fn monte_carlo_rate(c: &mut Criterion) {
    let profile = zipf_profile(1200, 1.0).unwrap();
    let params = SystemParams {
        k: 24,
        memory: BigRational::from_integer(150.into()),
        path_length: 2,
        colors: 3,
    };
    let mut group = c.benchmark_group("expected_rate_monte_carlo_20k");
    group.sample_size(20);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| expected_rate_monte_carlo(&profile, &params, 600, 20_000, 7).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, coloring_check, offloading, monte_carlo_rate);
criterion_main!(benches);
