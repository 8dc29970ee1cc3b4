use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hhllab_bench::dense_spd;
use hhllab_core::linalg::{
    conjugate_gradient, gaussian_elimination, hermitian_eigendecompose, JACOBI_TOL,
};

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("classical_solve");
    for n in [16usize, 32, 64] {
        let (a, b) = dense_spd(n);
        g.bench_with_input(BenchmarkId::new("gauss", n), &(&a, &b), |bench, (a, b)| {
            bench.iter(|| gaussian_elimination(a, b).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("cg", n), &(&a, &b), |bench, (a, b)| {
            bench.iter(|| conjugate_gradient(a, b, 1e-10, 10 * n).unwrap())
        });
    }
    g.finish();
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobi_eigen");
    for n in [4usize, 8, 16] {
        let (a, _) = dense_spd(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |bench, a| {
            bench.iter(|| hermitian_eigendecompose(a, JACOBI_TOL).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, solvers, eigen);
criterion_main!(benches);
