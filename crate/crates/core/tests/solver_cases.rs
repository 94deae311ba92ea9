use std::f64::consts::PI;

use latstab::lattice::{Grid, GridFunction, Lattice};
use latstab::models::{cell_average, plane_wave, LoadMode, Model, Region};
use latstab::solver::{
    convergence_study, equation_residual, h2_error, largest_converged_load, solve_equilibrium, trigonometric_load,
    EquilibriumProblem, LinearOperator, Scheme, SolverMethod, SolverOptions,
};
use latstab::Error;

fn grid(n: usize) -> Grid {
    Grid::new(Lattice::triangular(), n).unwrap()
}

fn smooth_load(g: &Grid) -> GridFunction<f64> {
    cell_average(g, 2, |x| {
        vec![(2.0 * PI * x[0]).sin() + 0.3 * (2.0 * PI * (x[0] + x[1])).cos(), (2.0 * PI * x[1]).cos()]
    })
}

fn problem(model: Model, g: &Grid, scheme: Scheme, load: GridFunction<f64>, nonlinear: bool) -> EquilibriumProblem {
    EquilibriumProblem {
        model,
        grid: g.clone(),
        load,
        scheme,
        nonlinear,
    }
}

#[test]
fn operator_annihilates_constants() {
    let g = grid(4);
    let c = GridFunction::<f64>::from_fn(&g, 2, |_, o| {
        o[0] = 2.5;
        o[1] = -0.4;
    });
    for m in [Model::HarmonicTriangular, Model::lj(1.0).unwrap()] {
        for s in [Scheme::Atomistic, Scheme::Hybrid, Scheme::Continuum] {
            let r = LinearOperator::new(&m, &g, s).apply(&c).unwrap();
            assert!(r.norm_linf() < 1e-9, "{} {s:?}", m.name());
        }
    }
}

#[test]
fn hybrid_rows_follow_region() {
    let g = grid(4);
    let m = Model::lj(1.0).unwrap();
    let u = GridFunction::<f64>::from_fn(&g, 2, |nu, o| {
        o[0] = (0.9 * nu[0] as f64 + 0.2 * nu[1] as f64).sin();
        o[1] = (0.4 * nu[1] as f64).cos();
    });
    let fh = LinearOperator::new(&m, &g, Scheme::Hybrid).force(&u).unwrap();
    let fa = LinearOperator::new(&m, &g, Scheme::Atomistic).force(&u).unwrap();
    let fc = LinearOperator::new(&m, &g, Scheme::Continuum).force(&u).unwrap();
    let mut seen = [0, 0];
    for lin in 0..g.len() {
        let nu = g.multi_index(lin);
        if Region::HalfSlab.is_continuum(&g, &nu) {
            assert_eq!(fh.point(lin), fc.point(lin));
            seen[0] += 1;
        } else {
            assert_eq!(fh.point(lin), fa.point(lin));
            seen[1] += 1;
        }
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn solution_satisfies_equation() {
    let g = grid(8);
    for m in [Model::HarmonicTriangular, Model::lj(1.0).unwrap()] {
        for s in [Scheme::Atomistic, Scheme::Hybrid] {
            let p = problem(m.clone(), &g, s, smooth_load(&g), false);
            let sol = solve_equilibrium(&p, &SolverOptions::default()).unwrap();
            assert!(sol.residual_norm <= 1e-10);
            assert!(equation_residual(&p, &sol.u).unwrap() <= 1e-9);
            assert!(sol.u.mean().iter().all(|v| v.abs() < 1e-13));
        }
    }
}

#[test]
fn direct_and_gmres_agree() {
    let g = grid(8);
    let m = Model::lj(1.0).unwrap();
    let p = problem(m, &g, Scheme::Hybrid, smooth_load(&g), false);
    let a = solve_equilibrium(&p, &SolverOptions::default()).unwrap();
    let d = solve_equilibrium(
        &p,
        &SolverOptions {
            method: SolverMethod::Direct,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(a.u.try_sub(&d.u).unwrap().norm_linf() < 1e-8 * d.u.norm_linf());
}

#[test]
fn direct_rejects_large_grids() {
    let g = grid(32);
    let p = problem(Model::HarmonicTriangular, &g, Scheme::Atomistic, smooth_load(&g), false);
    let opts = SolverOptions {
        method: SolverMethod::Direct,
        ..Default::default()
    };
    assert!(solve_equilibrium(&p, &opts).is_err());
}

#[test]
fn scheme_with_atomistic_region_only_matches_atomistic() {
    // continuum rows selected nowhere reproduce the atomistic solve
    let g = grid(8);
    let m = Model::HarmonicTriangular;
    let f = smooth_load(&g);
    let at = solve_equilibrium(&problem(m.clone(), &g, Scheme::Atomistic, f.clone(), false), &SolverOptions::default())
        .unwrap();
    let op = LinearOperator::new(&m, &g, Scheme::Atomistic);
    let r = op.apply(&at.u).unwrap().try_sub(&f).unwrap();
    assert!(r.norm_hk(0) < 1e-10);
}

#[test]
fn pair_model_newton_small_load() {
    let g = grid(4);
    let m = Model::lj_pair(1.0).unwrap();
    let f = smooth_load(&g).scaled(1e-2);
    let p = problem(m.clone(), &g, Scheme::Atomistic, f.clone(), true);
    let s = solve_equilibrium(&p, &SolverOptions::default()).unwrap();
    assert!(s.meta.newton_steps >= 1);
    assert!(equation_residual(&p, &s.u).unwrap() <= 1e-10);
    // nonlinear response stays close to the linear one at small load
    let lin = solve_equilibrium(&problem(m, &g, Scheme::Atomistic, f, false), &SolverOptions::default()).unwrap();
    let rel = s.u.try_sub(&lin.u).unwrap().norm_linf() / lin.u.norm_linf();
    assert!(rel < 0.1, "relative nonlinear correction {rel}");
}

#[test]
fn pair_model_large_load_reports_divergence() {
    let g = grid(4);
    let m = Model::lj_pair(1.0).unwrap();
    let shape = smooth_load(&g);
    let amps = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3];
    let best = largest_converged_load(&m, &g, &shape, &amps, &SolverOptions::default()).unwrap();
    assert!((1e-2..1e2).contains(&best), "largest converged amplitude {best}");
    let p = problem(m, &g, Scheme::Atomistic, shape.scaled(1e2), true);
    match solve_equilibrium(&p, &SolverOptions::default()) {
        Err(Error::NewtonDiverged { last_iterate, .. }) => assert_eq!(last_iterate.len(), 2 * g.len()),
        other => panic!("expected divergence, got {:?}", other.map(|s| s.residual_norm)),
    }
}

#[test]
fn h2_error_of_single_mode() {
    let g = grid(8);
    let eps = g.eps();
    assert_eq!(h2_error(&smooth_load(&g), &smooth_load(&g)).unwrap(), (0.0, 0.0, 0.0));
    let k = [2i64, -1];
    let u = plane_wave(&g, 2, 1, &k).real_part();
    let z = GridFunction::zeros(&g, 2);
    let (l2, h1, h2) = h2_error(&u, &z).unwrap();
    let w: f64 = k.iter().map(|&kj| 4.0 / (eps * eps) * (PI * eps * kj as f64).sin().powi(2)).sum();
    // real part of a unit plane wave carries half the energy
    assert!((l2 - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((h1 - (0.5 * (1.0 + w)).sqrt()).abs() < 1e-10 * h1);
    assert!(h2 > h1);
}

#[test]
fn convergence_is_second_order() {
    let m = Model::HarmonicTriangular;
    let load = trigonometric_load(
        &m,
        vec![
            LoadMode {
                component: 0,
                k: [1, 0],
                amplitude: 1.0,
            },
            LoadMode {
                component: 1,
                k: [0, 1],
                amplitude: 0.5,
            },
        ],
    );
    let t = convergence_study(&m, &load, &[8, 16, 32], &SolverOptions::default()).unwrap();
    let order = t.fitted_order.unwrap();
    assert!((1.8..=2.2).contains(&order), "order {order}");
    assert!(t.ratios.iter().all(|r| (3.0..=5.0).contains(r)));
    let single = convergence_study(&m, &load, &[8], &SolverOptions::default()).unwrap();
    assert_eq!(single.fitted_order, None);
    assert!(convergence_study(&m, &load, &[16, 8], &SolverOptions::default()).is_err());
}
