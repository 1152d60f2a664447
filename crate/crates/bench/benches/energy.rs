use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plate6::constitutive::{from_engineering, EngineeringParams};
use plate6::functional::{energy_and_gradient, total_energy, LoadSpec};
use plate6::so3::{exp_so3, log_so3};
use plate6::functional::BoundaryMode;
use plate6::solver::{random_configuration, solve_from_boundary, SolverSettings};
use plate6::{Material, PlateGrid, Vec3};
use std::hint::black_box;

fn plate() -> Material {
    Material::Isotropic(from_engineering(&EngineeringParams::new(1.0, 0.3, 0.1)).unwrap())
}

fn energy(c: &mut Criterion) {
    let material = plate();
    let mut group = c.benchmark_group("total_energy");
    for n in [17, 33, 65] {
        let grid = PlateGrid::clamped_square(1.0, n, 0.1).unwrap();
        let config = random_configuration(&grid, 0.05, 1);
        let loads = LoadSpec::uniform_force(&grid, Vec3::new(0.0, 0.0, 1e-3));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| total_energy(&grid, black_box(&config), &material, &loads).unwrap())
        });
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let material = plate();
    let mut group = c.benchmark_group("energy_and_gradient");
    for n in [17, 33, 65] {
        let grid = PlateGrid::clamped_square(1.0, n, 0.1).unwrap();
        let config = random_configuration(&grid, 0.05, 1);
        let loads = LoadSpec::uniform_force(&grid, Vec3::new(0.0, 0.0, 1e-3));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| energy_and_gradient(&grid, black_box(&config), &material, &loads).unwrap())
        });
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let material = plate();
    let grid = PlateGrid::clamped_square(1.0, 17, 0.1).unwrap();
    let loads = LoadSpec::uniform_force(&grid, Vec3::new(0.0, 0.0, 1e-3));
    let settings = SolverSettings::default();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    group.bench_function("clamped_17", |b| {
        b.iter(|| solve_from_boundary(&grid, &material, &loads, BoundaryMode::Clamped, &settings).unwrap())
    });
    group.finish();
}

fn rotations(c: &mut Criterion) {
    let w = Vec3::new(0.3, -1.2, 0.7);
    c.bench_function("exp_log_roundtrip", |b| b.iter(|| log_so3(&exp_so3(black_box(&w))).unwrap()));
}

criterion_group!(benches, energy, gradient, solve, rotations);
criterion_main!(benches);
