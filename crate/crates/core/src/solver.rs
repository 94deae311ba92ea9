//! Equilibrium solves, discrete Sobolev errors and refinement studies.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Grid, GridFunction};
use crate::models::{cell_average, select_region, Linearization, Model, Region};
use crate::stencil::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Atomistic,
    Hybrid,
    Continuum,
}

impl Scheme {
    pub fn region(&self) -> Region {
        match self {
            Scheme::Atomistic => Region::Atomistic,
            Scheme::Hybrid => Region::HalfSlab,
            Scheme::Continuum => Region::Continuum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Gmres,
    Direct,
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmres" => Ok(SolverMethod::Gmres),
            "direct" => Ok(SolverMethod::Direct),
            other => Err(Error::InvalidInput(format!("unknown solver method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub method: SolverMethod,
    pub newton_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            restart: 60,
            method: SolverMethod::Gmres,
            newton_max_iter: 30,
        }
    }
}

/// Largest `N` accepted by the dense direct solver.
pub const DIRECT_MAX_N: usize = 16;

#[derive(Debug, Clone)]
pub struct EquilibriumProblem {
    pub model: Model,
    pub grid: Grid,
    pub load: GridFunction<f64>,
    pub scheme: Scheme,
    pub nonlinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub method: SolverMethod,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub u: GridFunction<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub meta: SolverMeta,
}

/// `u ↦ −Π H u` for a region-selected pair of linear stencils.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub lin: Linearization,
}

impl LinearOperator {
    pub fn new(model: &Model, grid: &Grid, scheme: Scheme) -> Self {
        Self {
            lin: model.linearize(grid.eps(), scheme.region()),
        }
    }

    /// Unprojected `H u`.
    pub fn force(&self, u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
        match self.lin.region {
            Region::Atomistic => self.lin.atomistic.apply(u),
            Region::Continuum => self.lin.continuum.apply(u),
            Region::HalfSlab => {
                let fa = self.lin.atomistic.apply(u)?;
                let fc = self.lin.continuum.apply(u)?;
                Ok(select_region(u.grid(), self.lin.region, &fa, &fc))
            }
        }
    }

    pub fn apply(&self, u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
        Ok(self.force(u)?.project_zero_mean().scaled(-1.0))
    }
}

/// Exact inverse of `−h_at` on nonzero modes, identity on the mean.
pub struct SpectralPreconditioner {
    grid: Grid,
    components: usize,
    inverses: Vec<CMatrix>,
}

impl SpectralPreconditioner {
    pub fn new(lin: &Linearization, grid: &Grid) -> Result<Self> {
        let m = lin.atomistic.block();
        let eps = grid.eps();
        let inverses = (0..grid.len())
            .map(|lin_idx| {
                let k = grid.wave_index(lin_idx);
                if k.iter().all(|&v| v == 0) {
                    return Ok(CMatrix::identity(m, m));
                }
                let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
                let h = lin.atomistic.symbol(eps, &kf) * Complex64::new(-1.0, 0.0);
                h.try_inverse()
                    .ok_or_else(|| Error::SingularSystem(format!("atomistic symbol singular at k = {k:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            components: m,
            inverses,
        })
    }

    pub fn apply(&self, r: &GridFunction<f64>) -> GridFunction<f64> {
        let m = self.components;
        let mut spectrum = r.dft();
        for (lin, inv) in self.inverses.iter().enumerate() {
            let k = self.grid.wave_index(lin);
            let c = spectrum.coeff_mut(&k);
            let v = inv * DVector::from_column_slice(c);
            c.copy_from_slice(v.as_slice());
        }
        debug_assert_eq!(spectrum.components(), m);
        spectrum.idft().real_part()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖·‖_{ε,0}` scaling of the Euclidean norm.
fn eps_weight(grid: &Grid) -> f64 {
    grid.eps().powi(grid.dim() as i32).sqrt()
}

/// Right-preconditioned restarted GMRES for `A x = b`; stops when the ε-weighted residual
/// drops below `tol`. Returns the solution and the total inner iteration count.
pub fn gmres(
    a: &dyn Fn(&GridFunction<f64>) -> Result<GridFunction<f64>>,
    prec: &dyn Fn(&GridFunction<f64>) -> GridFunction<f64>,
    b: &GridFunction<f64>,
    x0: GridFunction<f64>,
    opts: &SolverOptions,
) -> Result<(GridFunction<f64>, usize)> {
    let grid = b.grid().clone();
    let m = b.components();
    let w = eps_weight(&grid);
    let mut x = x0;
    let mut total = 0;
    loop {
        let r = b.try_sub(&a(&x)?)?;
        let beta = norm2(r.values());
        if beta * w <= opts.tol {
            return Ok((x, total));
        }
        if total >= opts.max_iter {
            return Err(Error::KrylovStalled {
                iterations: total,
                residual: beta * w,
            });
        }
        let restart = opts.restart.min(opts.max_iter - total).max(1);
        let mut v: Vec<Vec<f64>> = vec![r.values().iter().map(|x| x / beta).collect()];
        let mut z: Vec<GridFunction<f64>> = Vec::new();
        let mut h = DMatrix::<f64>::zeros(restart + 1, restart);
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..restart {
            let vj = GridFunction::from_values(&grid, m, v[j].clone())?;
            let zj = prec(&vj);
            let mut wv = a(&zj)?.into_values();
            z.push(zj);
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&wv, vi);
                h[(i, j)] = hij;
                wv.iter_mut().zip(vi).for_each(|(a, b)| *a -= hij * b);
            }
            let hn = norm2(&wv);
            h[(j + 1, j)] = hn;
            for i in 0..j {
                let t = cs[i] * h[(i, j)] + sn[i] * h[(i + 1, j)];
                h[(i + 1, j)] = -sn[i] * h[(i, j)] + cs[i] * h[(i + 1, j)];
                h[(i, j)] = t;
            }
            let den = (h[(j, j)].powi(2) + h[(j + 1, j)].powi(2)).sqrt();
            if den == 0.0 {
                break;
            }
            cs[j] = h[(j, j)] / den;
            sn[j] = h[(j + 1, j)] / den;
            h[(j, j)] = den;
            h[(j + 1, j)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            if g[j + 1].abs() * w <= opts.tol * 0.5 || hn == 0.0 {
                break;
            }
            v.push(wv.iter().map(|x| x / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in i + 1..used {
                s -= h[(i, k)] * y[k];
            }
            y[i] = s / h[(i, i)];
        }
        let mut upd = x.into_values();
        for (yi, zi) in y.iter().zip(&z) {
            upd.iter_mut().zip(zi.values()).for_each(|(a, b)| *a += yi * b);
        }
        x = GridFunction::from_values(&grid, m, upd)?;
        if used == 0 {
            return Err(Error::KrylovStalled {
                iterations: total,
                residual: beta * w,
            });
        }
    }
}

/// Dense LU on the explicitly assembled operator (small grids only).
pub fn direct_solve(
    a: &dyn Fn(&GridFunction<f64>) -> Result<GridFunction<f64>>,
    b: &GridFunction<f64>,
) -> Result<GridFunction<f64>> {
    let grid = b.grid().clone();
    let m = b.components();
    if grid.n_half() > DIRECT_MAX_N {
        return Err(Error::InvalidInput(format!(
            "direct solver limited to N <= {DIRECT_MAX_N}, got {}",
            grid.n_half()
        )));
    }
    let n = grid.len() * m;
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = a(&GridFunction::from_values(&grid, m, e.clone())?)?;
        mat.set_column(j, &DVector::from_column_slice(col.values()));
        e[j] = 0.0;
    }
    let x = mat
        .lu()
        .solve(&DVector::from_column_slice(b.values()))
        .ok_or_else(|| Error::SingularSystem("assembled operator is singular".into()))?;
    GridFunction::from_values(&grid, m, x.as_slice().to_vec())
}

fn check_load(load: &GridFunction<f64>) -> Result<()> {
    let mean = load.mean();
    let scale = load.norm_linf().max(1.0);
    if mean.iter().any(|v| v.abs() > 1e-12 * scale) {
        return Err(Error::SingularSystem(format!("load has nonzero mean {mean:?}")));
    }
    Ok(())
}

/// `−Π H u + P₀ u`, nonsingular on the full space; agrees with `−Π H` on zero-mean fields.
fn regularized(op: &LinearOperator) -> impl Fn(&GridFunction<f64>) -> Result<GridFunction<f64>> + '_ {
    move |u| {
        let mut out = op.apply(u)?;
        let mean = u.mean();
        let m = u.components();
        for chunk in out.values_mut().chunks_mut(m) {
            chunk.iter_mut().zip(&mean).for_each(|(v, c)| *v += c);
        }
        Ok(out)
    }
}

fn linear_solve(
    op: &LinearOperator,
    pre: &SpectralPreconditioner,
    rhs: &GridFunction<f64>,
    opts: &SolverOptions,
) -> Result<(GridFunction<f64>, usize)> {
    let a = regularized(op);
    match opts.method {
        SolverMethod::Direct => Ok((direct_solve(&a, rhs)?, 1)),
        SolverMethod::Gmres => gmres(
            &a,
            &|r| pre.apply(r),
            rhs,
            GridFunction::zeros(rhs.grid(), rhs.components()),
            opts,
        ),
    }
}

/// Residual `‖−Π F[u] − f‖_{ε,0}` of the (possibly nonlinear) scheme.
pub fn equation_residual(problem: &EquilibriumProblem, u: &GridFunction<f64>) -> Result<f64> {
    let force = scheme_force(problem, u)?;
    let r = force.project_zero_mean().scaled(-1.0).try_sub(&problem.load)?;
    Ok(r.norm_hk(0))
}

fn scheme_force(problem: &EquilibriumProblem, u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    if problem.nonlinear {
        match problem.scheme {
            Scheme::Atomistic => problem.model.force_atomistic(u),
            Scheme::Continuum => problem.model.force_continuum(u),
            Scheme::Hybrid => problem.model.force_hybrid(u, Region::HalfSlab),
        }
    } else {
        LinearOperator::new(&problem.model, &problem.grid, problem.scheme).force(u)
    }
}

fn scheme_jacobian(problem: &EquilibriumProblem, u: &GridFunction<f64>, w: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    match problem.scheme {
        Scheme::Atomistic => problem.model.jacobian_atomistic(u, w),
        Scheme::Continuum => problem.model.force_continuum(w),
        Scheme::Hybrid => {
            let ja = problem.model.jacobian_atomistic(u, w)?;
            let jc = problem.model.force_continuum(w)?;
            Ok(select_region(&problem.grid, Region::HalfSlab, &ja, &jc))
        }
    }
}

pub fn solve_equilibrium(problem: &EquilibriumProblem, opts: &SolverOptions) -> Result<EquilibriumSolution> {
    check_load(&problem.load)?;
    let op = LinearOperator::new(&problem.model, &problem.grid, problem.scheme);
    let pre = SpectralPreconditioner::new(&op.lin, &problem.grid)?;
    if !problem.nonlinear || !problem.model.is_nonlinear() {
        let (u, it) = linear_solve(&op, &pre, &problem.load, opts)?;
        let u = u.project_zero_mean();
        let residual = op.apply(&u)?.try_sub(&problem.load)?.norm_hk(0);
        return Ok(EquilibriumSolution {
            u,
            residual_norm: residual,
            iterations: it,
            meta: SolverMeta {
                method: opts.method,
                newton_steps: 0,
            },
        });
    }
    let grid = &problem.grid;
    let m = problem.load.components();
    let mut u = GridFunction::<f64>::zeros(grid, m);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for step in 0..opts.newton_max_iter {
        let r = scheme_force(problem, &u)?
            .project_zero_mean()
            .scaled(-1.0)
            .try_sub(&problem.load)?;
        residual = r.norm_hk(0);
        if !residual.is_finite() {
            break;
        }
        if residual <= opts.tol {
            return Ok(EquilibriumSolution {
                u,
                residual_norm: residual,
                iterations,
                meta: SolverMeta {
                    method: opts.method,
                    newton_steps: step,
                },
            });
        }
        let jac = |w: &GridFunction<f64>| -> Result<GridFunction<f64>> {
            let mut out = scheme_jacobian(problem, &u, w)?.project_zero_mean().scaled(-1.0);
            let mean = w.mean();
            for chunk in out.values_mut().chunks_mut(m) {
                chunk.iter_mut().zip(&mean).for_each(|(v, c)| *v += c);
            }
            Ok(out)
        };
        let inner = SolverOptions {
            tol: (1e-3 * residual).max(1e-14),
            ..*opts
        };
        let rhs = r.scaled(-1.0);
        let step_result = match opts.method {
            SolverMethod::Direct => direct_solve(&jac, &rhs).map(|du| (du, 1)),
            SolverMethod::Gmres => gmres(&jac, &|v| pre.apply(v), &rhs, GridFunction::zeros(grid, m), &inner),
        };
        // a failed linearized step ends the iteration; report it as non-convergence
        let (du, it) = match step_result {
            Ok(v) => v,
            Err(Error::KrylovStalled { .. } | Error::SingularSystem(_)) => {
                return Err(Error::NewtonDiverged {
                    iterations: step,
                    residual,
                    last_iterate: u.into_values(),
                })
            }
            Err(e) => return Err(e),
        };
        iterations += it;
        u = u.try_add(&du)?.project_zero_mean();
    }
    Err(Error::NewtonDiverged {
        iterations: opts.newton_max_iter,
        residual,
        last_iterate: u.into_values(),
    })
}

/// `(‖e‖_{ε,0}, ‖e‖_{ε,1}, ‖e‖_{ε,2})` of `e = u1 − u2`.
pub fn h2_error(u1: &GridFunction<f64>, u2: &GridFunction<f64>) -> Result<(f64, f64, f64)> {
    let e = u1.try_sub(u2)?;
    Ok((e.norm_hk(0), e.norm_hk(1), e.norm_hk(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub eps: f64,
    pub error_l2: f64,
    pub error_h1: f64,
    pub error_h2: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub model: String,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log e_h2` against `log ε`; `None` with fewer than two rows.
    pub fitted_order: Option<f64>,
    /// `e_h2(N) / e_h2(2N)` for consecutive rows.
    pub ratios: Vec<f64>,
}

pub fn fitted_order(eps: &[f64], err: &[f64]) -> Option<f64> {
    if eps.len() < 2 || eps.len() != err.len() {
        return None;
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub type LoadFn = dyn Fn(&[f64]) -> Vec<f64> + Sync;

pub fn convergence_study(model: &Model, load: &LoadFn, n_list: &[usize], opts: &SolverOptions) -> Result<ConvergenceTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty N list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("N list must be strictly increasing".into()));
    }
    let lattice = model.lattice();
    let rows: Vec<Result<ConvergenceRow>> = n_list
        .par_iter()
        .map(|&n| {
            let grid = Grid::new(lattice.clone(), n)?;
            let f = cell_average(&grid, 2, load);
            let solve = |scheme| {
                solve_equilibrium(
                    &EquilibriumProblem {
                        model: model.clone(),
                        grid: grid.clone(),
                        load: f.clone(),
                        scheme,
                        nonlinear: false,
                    },
                    opts,
                )
            };
            let at = solve(Scheme::Atomistic)?;
            let qc = solve(Scheme::Hybrid)?;
            let (l2, h1, h2) = h2_error(&qc.u, &at.u)?;
            Ok(ConvergenceRow {
                n,
                eps: grid.eps(),
                error_l2: l2,
                error_h1: h1,
                error_h2: h2,
                iterations: at.iterations + qc.iterations,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.error_h2).collect();
    let ratios = err.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceTable {
        model: model.name().to_string(),
        fitted_order: fitted_order(&eps, &err),
        ratios,
        rows,
    })
}

/// Zero-mean trigonometric load built from Fourier modes.
pub fn trigonometric_load(model: &Model, modes: Vec<crate::models::LoadMode>) -> impl Fn(&[f64]) -> Vec<f64> + Sync {
    let lattice = model.lattice();
    move |x| crate::models::load_value(&lattice, &modes, 2, x)
}

/// Largest amplitude in `amplitudes` (ascending) at which the nonlinear solve converges.
pub fn largest_converged_load(
    model: &Model,
    grid: &Grid,
    shape: &GridFunction<f64>,
    amplitudes: &[f64],
    opts: &SolverOptions,
) -> Option<f64> {
    let mut best = None;
    for &a in amplitudes {
        let p = EquilibriumProblem {
            model: model.clone(),
            grid: grid.clone(),
            load: shape.scaled(a),
            scheme: Scheme::Atomistic,
            nonlinear: true,
        };
        match solve_equilibrium(&p, opts) {
            Ok(_) => best = Some(a),
            Err(_) => break,
        }
    }
    best
}

/// Plane-wave response of the atomistic operator: `Re[(−h_at(ξ))⁻¹ e_c e^{iξ·x}]`.
pub fn plane_wave_response(model: &Model, grid: &Grid, c: usize, k: [i64; 2]) -> Result<GridFunction<f64>> {
    let kf = [k[0] as f64, k[1] as f64];
    let h = model.atomistic_stencil(grid.eps()).symbol(grid.eps(), &kf) * Complex64::new(-1.0, 0.0);
    let inv = h
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("symbol singular".into()))?;
    let wave = crate::models::plane_wave(grid, 2, c, &k);
    let col = inv.column(c).into_owned();
    let u = GridFunction::from_fn(grid, 2, |nu, out| {
        let e = wave.at(nu)[c];
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o = (v * e).re;
        }
    });
    Ok(u)
}
