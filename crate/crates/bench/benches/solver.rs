use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use latstab::lattice::{Grid, Lattice};
use latstab::models::cell_average;
use latstab::{solve_equilibrium, EquilibriumProblem, Model, Scheme, SolverMethod, SolverOptions};

fn problem(n: usize) -> EquilibriumProblem {
    let grid = Grid::new(Lattice::triangular(), n).unwrap();
    let load = cell_average(&grid, 2, |x| vec![(2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).cos()]);
    EquilibriumProblem {
        model: Model::lj(1.0).unwrap(),
        grid,
        load,
        scheme: Scheme::Hybrid,
        nonlinear: false,
    }
}

fn gmres(c: &mut Criterion) {
    let mut group = c.benchmark_group("hybrid_gmres");
    group.sample_size(10);
    for n in [16, 32, 64] {
        let p = problem(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| solve_equilibrium(black_box(p), &SolverOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn direct(c: &mut Criterion) {
    let p = problem(8);
    let opts = SolverOptions {
        method: SolverMethod::Direct,
        ..Default::default()
    };
    c.bench_function("hybrid_direct_8", |b| b.iter(|| solve_equilibrium(black_box(&p), &opts).unwrap()));
}

criterion_group!(benches, gmres, direct);
criterion_main!(benches);
