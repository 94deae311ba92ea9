use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use latstab::lattice::{Grid, Lattice};
use latstab::stability::{char_poly, fold_pair, mode1_matrix, roots_classified};
use latstab::{full_stability_report, Model, StabilityOptions};
use num_complex::Complex64;

fn roots(c: &mut Criterion) {
    let eps = 1.0 / 32.0;
    let m = Model::lj(1.0).unwrap();
    let s = m.continuum_stencil(eps);
    let zeta = Complex64::from_polar(1.0, 0.9);
    c.bench_function("char_poly_roots_lj_continuum", |b| {
        b.iter(|| roots_classified(&char_poly(black_box(&s), zeta), 1e-8).unwrap())
    });
    let (sys, _) = fold_pair(&m.atomistic_stencil(eps), &s, eps).unwrap();
    c.bench_function("mode1_matrix_lj", |b| b.iter(|| mode1_matrix(black_box(&sys), zeta, 1e-8).unwrap()));
}

fn reports(c: &mut Criterion) {
    let g = Grid::new(Lattice::triangular(), 16).unwrap();
    let opts = StabilityOptions::default();
    let mut group = c.benchmark_group("full_report");
    group.sample_size(10);
    for m in [Model::HarmonicTriangular, Model::lj(1.0).unwrap()] {
        group.bench_function(m.name(), |b| b.iter(|| full_stability_report(black_box(&m), &g, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, roots, reports);
criterion_main!(benches);
