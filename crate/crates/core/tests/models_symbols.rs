use std::f64::consts::PI;

use latstab::lattice::{Grid, GridFunction, Lattice};
use latstab::models::{cell_average, lj_constants, plane_wave, Model, Region};
use latstab::stencil::{hermitian_defect, max_entry};
use num_complex::Complex64;
use proptest::prelude::*;

fn models() -> Vec<Model> {
    vec![Model::HarmonicTriangular, Model::lj(1.0).unwrap(), Model::lj_pair(1.0).unwrap()]
}

#[test]
fn lj_constants_reference_values() {
    let c = lj_constants(1.0).unwrap();
    assert!((c.k - 378.0 / 365.0).abs() < 1e-15);
    assert!((c.kappa[0] + 3.0 * c.kappa[2]).abs() < 1e-12);
    assert!((c.kappa[1] + 9.0 * c.kappa[3] - 70.456).abs() < 1e-3);
    assert!((60.0 * c.k - 62.137).abs() < 1e-3);
    assert!(c.elasticity_margin() > 0.0);
    assert!(lj_constants(0.0).is_err());
    assert!(lj_constants(-1.0).is_err());
}

#[test]
fn pair_model_linearizes_to_kappa_stencil() {
    let a = Model::lj(1.0).unwrap().atomistic_coefficients();
    let b = Model::lj_pair(1.0).unwrap().atomistic_coefficients();
    for s in 0..2 {
        assert!((a.alpha[s] - b.alpha[s]).abs() <= 1e-12 * a.alpha[s].abs());
        assert!((a.beta[s] - b.beta[s]).abs() <= 1e-12 * a.beta[s].abs());
    }
}

#[test]
fn stencils_annihilate_constants() {
    let g = Grid::new(Lattice::triangular(), 4).unwrap();
    let c = GridFunction::<f64>::from_fn(&g, 2, |_, o| {
        o[0] = 0.7;
        o[1] = -1.3;
    });
    for m in models() {
        for s in [m.atomistic_stencil(g.eps()), m.continuum_stencil(g.eps())] {
            assert_eq!(s.row_sum().amax(), 0.0);
            let scale = max_entry(&s.symbol(g.eps(), &[1.0, 1.0]));
            assert!(s.apply(&c).unwrap().norm_linf() < 1e-12 * scale);
        }
    }
}

#[test]
fn operators_act_on_plane_waves_by_symbol() {
    let g = Grid::new(Lattice::triangular(), 8).unwrap();
    let eps = g.eps();
    for m in models() {
        let s = m.atomistic_stencil(eps);
        for k in [[1i64, 0], [0, 3], [2, -5], [-7, 7], [4, 4]] {
            for comp in 0..2 {
                let w = plane_wave(&g, 2, comp, &k);
                let hw = s.apply(&w).unwrap();
                let h = s.symbol(eps, &[k[0] as f64, k[1] as f64]);
                for lin in 0..g.len() {
                    let e = w.point(lin)[comp];
                    for r in 0..2 {
                        let want = h[(r, comp)] * e;
                        assert!((hw.point(lin)[r] - want).norm() < 1e-9 * max_entry(&h).max(1.0));
                    }
                }
            }
        }
    }
}

#[test]
fn linear_forces_match_stencils() {
    let g = Grid::new(Lattice::triangular(), 4).unwrap();
    let u = GridFunction::<f64>::from_fn(&g, 2, |nu, o| {
        o[0] = ((nu[0] * 3 + nu[1]) as f64).sin();
        o[1] = ((nu[0] - 2 * nu[1]) as f64).cos();
    });
    for m in models() {
        let a = m.linear_force_atomistic(&u).unwrap();
        let b = m.atomistic_stencil(g.eps()).apply(&u).unwrap();
        assert!(a.try_sub(&b).unwrap().norm_linf() < 1e-9 * b.norm_linf());
        let a = m.force_continuum(&u).unwrap();
        let b = m.continuum_stencil(g.eps()).apply(&u).unwrap();
        assert!(a.try_sub(&b).unwrap().norm_linf() < 1e-9 * b.norm_linf());
    }
}

#[test]
fn force_consistency_is_second_order() {
    // smooth u: atomistic minus continuum force decays like ε²
    let diff = |n: usize, m: &Model| {
        let g = Grid::new(Lattice::triangular(), n).unwrap();
        let u = GridFunction::<f64>::from_fn(&g, 2, |nu, o| {
            let t = [nu[0] as f64 * g.eps(), nu[1] as f64 * g.eps()];
            o[0] = (2.0 * PI * t[0]).sin() * (2.0 * PI * t[1]).cos();
            o[1] = (2.0 * PI * (t[0] + t[1])).cos();
        });
        let fa = m.linear_force_atomistic(&u).unwrap();
        let fc = m.force_continuum(&u).unwrap();
        fa.try_sub(&fc).unwrap().project_zero_mean().norm_linf()
    };
    for m in [Model::HarmonicTriangular, Model::lj(1.0).unwrap()] {
        let r = diff(16, &m) / diff(32, &m);
        assert!((3.0..=5.0).contains(&r), "{} ratio {r}", m.name());
    }
}

#[test]
fn hybrid_force_selects_rows() {
    let g = Grid::new(Lattice::triangular(), 4).unwrap();
    let m = Model::lj(1.0).unwrap();
    let u = GridFunction::<f64>::from_fn(&g, 2, |nu, o| {
        o[0] = (nu[0] as f64 * 0.3).sin();
        o[1] = (nu[1] as f64 * 0.7).cos();
    });
    let fa = m.force_atomistic(&u).unwrap();
    let fc = m.force_continuum(&u).unwrap();
    let fh = m.force_hybrid(&u, Region::HalfSlab).unwrap();
    for lin in 0..g.len() {
        let nu = g.multi_index(lin);
        let want = if Region::HalfSlab.is_continuum(&g, &nu) { fc.point(lin) } else { fa.point(lin) };
        assert_eq!(fh.point(lin), want);
    }
}

#[test]
fn cell_average_is_close_to_midpoint() {
    let f = |x: &[f64]| vec![(2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).cos()];
    let err = |n: usize| {
        let g = Grid::new(Lattice::triangular(), n).unwrap();
        let avg = cell_average(&g, 2, f);
        let mid = GridFunction::<f64>::from_fn(&g, 2, |nu, o| {
            let t = [g.eps() * (nu[0] as f64 + 0.5), g.eps() * (nu[1] as f64 + 0.5)];
            let x = g.lattice().cartesian(&t);
            o.copy_from_slice(&f(&x));
        })
        .project_zero_mean();
        avg.try_sub(&mid).unwrap().norm_linf()
    };
    let r = err(8) / err(16);
    assert!((3.0..=5.0).contains(&r), "ratio {r}");
    let g = Grid::new(Lattice::triangular(), 8).unwrap();
    assert!(cell_average(&g, 2, f).mean().iter().all(|m| m.abs() < 1e-15));
}

#[test]
fn harmonic_cauchy_born_symbol_is_isotropic() {
    let m = Model::HarmonicTriangular;
    for k in [[1.0, 0.0], [0.3, -2.0], [2.5, 1.5]] {
        let xi = Lattice::triangular().wavevector(&k);
        let xi2: f64 = xi.iter().map(|v| v * v).sum();
        let h = m.symbol_cb(&k);
        let want = nalgebra::DMatrix::<Complex64>::identity(2, 2) * Complex64::new(-6.0 * xi2, 0.0);
        assert!(max_entry(&(h - want)) < 1e-10 * xi2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symbols_are_hermitian_and_nonpositive(k0 in -16.0f64..16.0, k1 in -16.0f64..16.0) {
        let eps = 1.0 / 32.0;
        for m in [Model::HarmonicTriangular, Model::lj(1.0).unwrap()] {
            for s in [m.atomistic_stencil(eps), m.continuum_stencil(eps)] {
                let h = s.symbol(eps, &[k0, k1]);
                prop_assert!(hermitian_defect(&h) <= 1e-12 * max_entry(&h).max(1.0));
                let ev = h.symmetric_eigenvalues();
                prop_assert!(ev.iter().all(|&e| e <= 1e-9 * max_entry(&h).max(1.0)));
            }
        }
    }

    #[test]
    fn pair_jacobian_matches_finite_differences(seed in 0u64..1000) {
        let g = Grid::new(Lattice::triangular(), 2).unwrap();
        let m = Model::lj_pair(1.0).unwrap();
        let mut s = seed as f64;
        let mut next = || { s = (s * 1.618_033_988_7 + 0.314_159).fract(); s - 0.5 };
        let u = GridFunction::<f64>::from_fn(&g, 2, |_, o| o.iter_mut().for_each(|v| *v = 1e-3 * next()));
        let w = GridFunction::<f64>::from_fn(&g, 2, |_, o| o.iter_mut().for_each(|v| *v = next()));
        let h = 1e-6;
        let fp = m.force_atomistic(&u.try_add(&w.scaled(h)).unwrap()).unwrap();
        let fm = m.force_atomistic(&u.try_sub(&w.scaled(h)).unwrap()).unwrap();
        let fd = fp.try_sub(&fm).unwrap().scaled(0.5 / h);
        let j = m.jacobian_atomistic(&u, &w).unwrap();
        prop_assert!(fd.try_sub(&j).unwrap().norm_linf() <= 1e-5 * j.norm_linf());
    }
}
