use std::hint::black_box;
use std::sync::Arc;

use bivekua::{
    d_bar, gram_schmidt, kernel_eval, make_solution_set, solve_s, theodorescu, Bicomplex, Coefficients, Complex64,
    Domain, DomainSpec, Grid, GridFunction,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn grid(n: usize) -> Arc<Grid> {
    Arc::new(Grid::from_spec(DomainSpec::new(Domain::unit_disk(), n)).unwrap())
}

fn field(g: &Arc<Grid>) -> GridFunction {
    GridFunction::from_fn(g, |z| Bicomplex::new(z * z + 1.0, Complex64::new(z.im, -z.re)))
}

fn algebra(c: &mut Criterion) {
    let a = Bicomplex::from_parts(0.3, -1.2, 0.7, 0.4);
    let b = Bicomplex::from_parts(-0.5, 0.1, 2.0, -0.9);
    c.bench_function("bicomplex mul", |bch| bch.iter(|| black_box(a) * black_box(b)));
    c.bench_function("bicomplex inverse", |bch| bch.iter(|| black_box(a).inverse()));
}

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("operators");
    for n in [32, 64] {
        let g = grid(n);
        let w = field(&g);
        group.bench_with_input(BenchmarkId::new("d_bar", n), &w, |b, w| b.iter(|| d_bar(w)));
        group.bench_with_input(BenchmarkId::new("theodorescu", n), &w, |b, w| b.iter(|| theodorescu(w)));
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let g = grid(32);
    let coeffs = Coefficients::constant(&g, Bicomplex::from_parts(0.8, 0.0, 0.3, 0.0), Bicomplex::from_parts(0.0, 0.6, 0.2, 0.0));
    let rhs = field(&g);
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("solve S W = G, n = 32", |b| b.iter(|| solve_s(&coeffs, &rhs).unwrap()));
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let g = grid(48);
    let basis = gram_schmidt(&make_solution_set(&Coefficients::zero(&g), 8).unwrap()).unwrap();
    let a = Bicomplex::ONE;
    let (z, zeta) = (Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.25));
    c.bench_function("kernel evaluation, 16 members", |b| b.iter(|| kernel_eval(&basis, a, z, zeta).unwrap()));
}

criterion_group!(benches, algebra, operators, solver, kernel);
criterion_main!(benches);
