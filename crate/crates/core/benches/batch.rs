//! Sequential vs rayon paths for the batch entry points.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tiltaxle::energy::{default_batteries, PowerModel};
use tiltaxle::planner::{plan_batch, Cell, PlannerConfig, TerrainGrid};
use tiltaxle::scenario::run_bundled;
use tiltaxle::statics::wall_tilt_sweep;
use tiltaxle::vehicle::{RotorModel, VehicleParams};
use tiltaxle::Execution;

const PATHS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

/// 40×40 field with rolling elevation and a broken wall of obstacles.
fn terrain() -> TerrainGrid {
    let n = 40;
    let elevation = (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as f64, (i / n) as f64);
            0.2 * (0.3 * x).sin() * (0.2 * y).cos()
        })
        .collect();
    let mut grid = TerrainGrid::new(n, n, 1.0, elevation).unwrap();
    for y in 0..n - 4 {
        grid.set_class((n / 2, y), tiltaxle::planner::CellClass::Obstacle).unwrap();
    }
    grid
}

fn planner_batch(c: &mut Criterion) {
    let grid = terrain();
    let model = PowerModel::calibrated_default();
    let cfg = PlannerConfig::default();
    let batteries = default_batteries();
    let queries: Vec<(Cell, Cell)> = (0..32).map(|k| ((0, k), (39, 39 - k))).collect();
    let mut group = c.benchmark_group("plan_batch_32_queries");
    for (name, execution) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &execution, |b, &execution| {
            b.iter(|| plan_batch(black_box(&grid), &queries, &cfg, &model, &batteries, execution).unwrap())
        });
    }
    group.finish();
}

fn wall_sweep(c: &mut Criterion) {
    let params = VehicleParams::default();
    let rotor = RotorModel::default_rotor();
    let mut group = c.benchmark_group("wall_tilt_sweep_0.001deg");
    for (name, execution) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &execution, |b, &execution| {
            b.iter(|| wall_tilt_sweep(black_box(&params), &rotor, 0.001, execution))
        });
    }
    group.finish();
}

fn scenarios(c: &mut Criterion) {
    let mut group = c.benchmark_group("bundled_scenarios");
    group.sample_size(10);
    for (name, execution) in PATHS {
        group.bench_with_input(BenchmarkId::from_parameter(name), &execution, |b, &execution| {
            b.iter(|| run_bundled(execution))
        });
    }
    group.finish();
}

criterion_group!(benches, planner_batch, wall_sweep, scenarios);
criterion_main!(benches);
