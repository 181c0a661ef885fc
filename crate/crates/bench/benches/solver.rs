use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ccmt_core::benchmarks::PhiKappa;
use ccmt_core::ccms::{solve_ccms, CcmsCoefficients};
use ccmt_core::eigensystem::{solve_dispersion, ReferenceParams, Station};
use ccmt_core::geometry::StripGeometry;
use ccmt_core::oracle::sigma_fd_solve;

fn setup() -> (ReferenceParams, StripGeometry, Vec<f64>) {
    let h0 = 1.0;
    let geo = StripGeometry::cosine_surface(h0, 0.5, 1, 0.0).unwrap();
    let params = ReferenceParams::from_wavenumber(1.0, h0).unwrap();
    let field = PhiKappa::new(1.0, h0);
    let psi = geo
        .grid(128)
        .into_iter()
        .map(|x| field.surface_data(&geo, x))
        .collect();
    (params, geo, psi)
}

fn bench_dispersion(c: &mut Criterion) {
    let params = ReferenceParams::from_wavenumber(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("dispersion");
    for n in [10usize, 40, 160] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| solve_dispersion(params.mu0, 1.37, n).unwrap())
        });
    }
    group.finish();
}

fn bench_station(c: &mut Criterion) {
    let (params, geo, _) = setup();
    c.bench_function("station_build_20_modes", |b| {
        b.iter(|| Station::build(&params, &geo, 0.7, 20).unwrap())
    });
}

fn bench_assembly(c: &mut Criterion) {
    let (params, geo, _) = setup();
    let mut group = c.benchmark_group("assembly");
    group.sample_size(10);
    for m in [5usize, 15] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| CcmsCoefficients::assemble(&params, &geo, 128, m, None).unwrap())
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let (params, geo, psi) = setup();
    let coeffs = CcmsCoefficients::assemble(&params, &geo, 128, 15, None).unwrap();
    let mut group = c.benchmark_group("coupled_solve");
    group.sample_size(20);
    for m in [5usize, 15] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| solve_ccms(&coeffs, m, &psi).unwrap())
        });
    }
    group.finish();
}

fn bench_grid_oracle(c: &mut Criterion) {
    let (_, geo, psi) = setup();
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(10);
    group.bench_function("128x64", |b| {
        b.iter(|| sigma_fd_solve(&geo, &psi, 64).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_dispersion,
    bench_station,
    bench_assembly,
    bench_solve,
    bench_grid_oracle
);
criterion_main!(benches);
