use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use riesz_bench::{order3, unit_sphere};
use riesz_core::one_dim::{riesz_potential_1d, CompactSource};
use riesz_core::verify::{fractional_laplacian_grid, surface_fourier, BoxGrid};
use riesz_core::{
    assemble, BoundaryDensity, Cutoff, DirichletProblem, DirichletSolver, FractionalOrder, Point3, Side,
    VolumeSource,
};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    g.sample_size(10);
    for level in [1, 2] {
        let s = unit_sphere(level);
        g.bench_function(format!("sphere_level{level}"), |b| {
            b.iter(|| assemble(s.clone(), order3(1.5)).unwrap())
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let s = unit_sphere(2);
    let solver = DirichletSolver::new(s.clone(), order3(1.5)).unwrap();
    let phi = BoundaryDensity::constant(s.len(), 1.0);
    let p = DirichletProblem::new(order3(1.5), s.clone(), Side::Interior, VolumeSource::interior(|_| 1.0), phi)
        .unwrap()
        .with_volume_resolution(8);
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("interior_level2_full", |b| b.iter(|| solver.solve(&p, Cutoff::Full).unwrap()));
    let sol = solver.solve(&p, Cutoff::Full).unwrap();
    let x = Point3::new(0.2, 0.1, -0.3);
    g.bench_function("evaluate_point", |b| b.iter(|| sol.eval(black_box(&x)).unwrap()));
    g.finish();
}

fn spectral(c: &mut Criterion) {
    let mut grid = BoxGrid::centered(Point3::zeros(), 8.0, 64).unwrap();
    grid.fill(|x| (-x.norm_squared()).exp());
    let mut g = c.benchmark_group("spectral");
    g.sample_size(10);
    g.bench_function("fractional_laplacian_64", |b| {
        b.iter(|| fractional_laplacian_grid(&grid, 1.5).unwrap())
    });
    let s = unit_sphere(2);
    let density = BoundaryDensity::constant(s.len(), 1.0);
    let xi = Point3::new(3.0, -1.0, 2.0);
    g.bench_function("surface_fourier_level2", |b| {
        b.iter(|| surface_fourier(&s, &density, black_box(&xi)).unwrap())
    });
    g.finish();
}

fn one_dimensional(c: &mut Criterion) {
    let a = FractionalOrder::one_d(0.5).unwrap();
    let src = CompactSource::new(|y| (1.0 - y * y).powi(2), (-1.0, 1.0)).unwrap();
    c.bench_function("riesz_potential_1d", |b| {
        b.iter(|| riesz_potential_1d(a, &src, black_box(0.3)).unwrap())
    });
}

criterion_group!(benches, assembly, solve, spectral, one_dimensional);
criterion_main!(benches);
