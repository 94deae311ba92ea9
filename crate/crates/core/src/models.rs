//! Pair-interaction models on the triangular lattice.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Grid, GridFunction, Lattice, Scalar};
use crate::stencil::{CMatrix, Stencil};

/// First and second neighbour offsets in lattice coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborShells {
    pub first: Vec<[i64; 2]>,
    pub second: Vec<[i64; 2]>,
}

impl NeighborShells {
    pub fn triangular() -> Self {
        let first = vec![[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];
        let second = vec![[1, 1], [-1, 2], [-2, 1], [-1, -1], [1, -2], [2, -1]];
        Self { first, second }
    }

    pub fn shell(&self, s: usize) -> &[[i64; 2]] {
        if s == 0 {
            &self.first
        } else {
            &self.second
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjConstants {
    pub k: f64,
    pub kappa: [f64; 4],
    pub sigma: f64,
    pub eps_lattice: f64,
}

impl LjConstants {
    /// `κ₂ + 9κ₄ − 60K`.
    pub fn elasticity_margin(&self) -> f64 {
        self.kappa[1] + 9.0 * self.kappa[3] - 60.0 * self.k
    }
}

fn lj_g(k: f64, r: f64) -> f64 {
    12.0 * k * (-k * r.powi(-14) + r.powi(-8))
}

fn lj_h(k: f64, r: f64) -> f64 {
    12.0 * k * (14.0 * k * r.powi(-14) - 8.0 * r.powi(-8))
}

pub fn lj_constants(sigma: f64) -> Result<LjConstants> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let k = (1.0 + 3f64.powi(-3)) / (1.0 + 3f64.powi(-6));
    let r3 = 3f64.sqrt();
    Ok(LjConstants {
        k,
        kappa: [lj_g(k, 1.0), lj_h(k, 1.0), lj_g(k, r3), lj_h(k, r3)],
        sigma,
        eps_lattice: (2.0 / k).powf(1.0 / 6.0) * sigma,
    })
}

/// Radial pair energy `φ(r)` with its first two derivatives.
pub trait PairPotential: Debug + Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
}

/// `φ(r) = K² r⁻¹² − 2K r⁻⁶`.
#[derive(Debug, Clone, Copy)]
pub struct LennardJones {
    pub k: f64,
}

impl PairPotential for LennardJones {
    fn value(&self, r: f64) -> f64 {
        self.k * self.k * r.powi(-12) - 2.0 * self.k * r.powi(-6)
    }
    fn d1(&self, r: f64) -> f64 {
        12.0 * self.k * (-self.k * r.powi(-13) + r.powi(-7))
    }
    fn d2(&self, r: f64) -> f64 {
        12.0 * self.k * (13.0 * self.k * r.powi(-14) - 7.0 * r.powi(-8))
    }
}

/// `φ(r) + c (r − r₀)²`.
#[derive(Debug, Clone)]
pub struct Stiffened {
    pub base: Arc<dyn PairPotential>,
    pub r0: f64,
    pub c: f64,
}

impl PairPotential for Stiffened {
    fn value(&self, r: f64) -> f64 {
        self.base.value(r) + self.c * (r - self.r0).powi(2)
    }
    fn d1(&self, r: f64) -> f64 {
        self.base.d1(r) + 2.0 * self.c * (r - self.r0)
    }
    fn d2(&self, r: f64) -> f64 {
        self.base.d2(r) + 2.0 * self.c
    }
}

/// Two-shell nonlinear pair model.
#[derive(Debug, Clone)]
pub struct PairModel {
    pub potentials: [Arc<dyn PairPotential>; 2],
}

impl PairModel {
    /// Truncated LJ whose linearization at the reference lattice reproduces the κ-constants.
    pub fn truncated_lj(c: &LjConstants) -> Self {
        let base: Arc<dyn PairPotential> = Arc::new(LennardJones { k: c.k });
        let second = Stiffened {
            base: base.clone(),
            r0: 3f64.sqrt(),
            c: c.kappa[3],
        };
        Self {
            potentials: [base, Arc::new(second)],
        }
    }
}

/// Linear pair-form coefficients: bond force `α D⁺u + β ⟨D⁺u, μ⟩μ` per shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficients {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl PairCoefficients {
    /// Lumps the second shell onto the first (`μ₂ = ±(μ + μ')` collapses to NN directions).
    pub fn lumped(&self) -> Self {
        Self {
            alpha: [self.alpha[0] + 3.0 * self.alpha[1], 0.0],
            beta: [self.beta[0] + 9.0 * self.beta[1], 0.0],
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    HarmonicTriangular,
    LjTriangular(LjConstants),
    PairPotentialTriangular(PairModel),
}

/// Sharp indicator `ϱ` of the continuum region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Atomistic,
    Continuum,
    /// Continuum where `0 ≤ ν₀ < N`.
    HalfSlab,
}

impl Region {
    pub fn is_continuum(&self, grid: &Grid, nu: &[i64]) -> bool {
        match self {
            Region::Atomistic => false,
            Region::Continuum => true,
            Region::HalfSlab => {
                let v = nu[0].rem_euclid(grid.side() as i64);
                v < grid.n_half() as i64
            }
        }
    }
}

/// Linearized stencils of a model at `u = 0`.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub atomistic: Stencil,
    pub continuum: Stencil,
    pub region: Region,
}

impl Linearization {
    pub fn select(&self, grid: &Grid, nu: &[i64]) -> &Stencil {
        if self.region.is_continuum(grid, nu) {
            &self.continuum
        } else {
            &self.atomistic
        }
    }

    /// `(1 − ϱ(x)) h_at(ξ) + ϱ(x) h_ε(ξ)`.
    pub fn hybrid_symbol(&self, grid: &Grid, nu: &[i64], k: &[f64]) -> CMatrix {
        self.select(grid, nu).symbol(grid.eps(), k)
    }
}

impl Model {
    pub fn lj(sigma: f64) -> Result<Self> {
        Ok(Model::LjTriangular(lj_constants(sigma)?))
    }

    pub fn lj_pair(sigma: f64) -> Result<Self> {
        Ok(Model::PairPotentialTriangular(PairModel::truncated_lj(&lj_constants(sigma)?)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::HarmonicTriangular => "harmonic",
            Model::LjTriangular(_) => "lj",
            Model::PairPotentialTriangular(_) => "lj-pair",
        }
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::triangular()
    }

    pub fn shells(&self) -> NeighborShells {
        NeighborShells::triangular()
    }

    pub fn lj_constants(&self) -> Option<&LjConstants> {
        match self {
            Model::LjTriangular(c) => Some(c),
            _ => None,
        }
    }

    pub fn atomistic_coefficients(&self) -> PairCoefficients {
        match self {
            Model::HarmonicTriangular => PairCoefficients {
                alpha: [1.0, 1.0],
                beta: [0.0, 0.0],
            },
            Model::LjTriangular(c) => PairCoefficients {
                alpha: [2.0 * c.kappa[0], 2.0 * c.kappa[2]],
                beta: [2.0 * c.kappa[1], 2.0 * c.kappa[3]],
            },
            Model::PairPotentialTriangular(p) => {
                let mut alpha = [0.0; 2];
                let mut beta = [0.0; 2];
                for (s, r) in [1.0, 3f64.sqrt()].into_iter().enumerate() {
                    let phi = &p.potentials[s];
                    alpha[s] = 2.0 * phi.d1(r) / r;
                    beta[s] = 2.0 * (phi.d2(r) - phi.d1(r) / r) / (r * r);
                }
                PairCoefficients { alpha, beta }
            }
        }
    }

    pub fn continuum_coefficients(&self) -> PairCoefficients {
        match self {
            Model::HarmonicTriangular => PairCoefficients {
                alpha: [4.0, 0.0],
                beta: [0.0, 0.0],
            },
            Model::LjTriangular(c) => PairCoefficients {
                alpha: [0.0, 0.0],
                beta: [2.0 * (c.kappa[1] + 9.0 * c.kappa[3]), 0.0],
            },
            Model::PairPotentialTriangular(_) => self.atomistic_coefficients().lumped(),
        }
    }

    fn bonds(&self, coeffs: &PairCoefficients) -> Vec<(Vec<i64>, f64, f64)> {
        let shells = self.shells();
        let mut out = Vec::new();
        for s in 0..2 {
            if coeffs.alpha[s] == 0.0 && coeffs.beta[s] == 0.0 {
                continue;
            }
            for mu in shells.shell(s) {
                out.push((mu.to_vec(), coeffs.alpha[s], coeffs.beta[s]));
            }
        }
        out
    }

    pub fn atomistic_stencil(&self, eps: f64) -> Stencil {
        let c = self.atomistic_coefficients();
        Stencil::from_bonds(&self.lattice(), &self.bonds(&c), 1.0 / (eps * eps))
    }

    pub fn continuum_stencil(&self, eps: f64) -> Stencil {
        let c = self.continuum_coefficients();
        Stencil::from_bonds(&self.lattice(), &self.bonds(&c), 1.0 / (eps * eps))
    }

    pub fn linearize(&self, eps: f64, region: Region) -> Linearization {
        Linearization {
            atomistic: self.atomistic_stencil(eps),
            continuum: self.continuum_stencil(eps),
            region,
        }
    }

    /// Continuum elasticity symbol `−½ Σ_μ C(μ) (μ_geo·ξ)²` at reciprocal coefficients `k`.
    pub fn symbol_cb(&self, k: &[f64]) -> CMatrix {
        self.atomistic_stencil(1.0).quadratic_limit(1.0, k)
    }

    fn linear_force<T: Scalar>(&self, coeffs: &PairCoefficients, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        check_field(u)?;
        let lattice = self.lattice();
        let shells = self.shells();
        let inv = 1.0 / u.grid().eps();
        let mut out = GridFunction::<T>::zeros(u.grid(), 2);
        for s in 0..2 {
            let (alpha, beta) = (coeffs.alpha[s], coeffs.beta[s]);
            if alpha == 0.0 && beta == 0.0 {
                continue;
            }
            for mu in shells.shell(s) {
                let g = lattice.cartesian(&[mu[0] as f64, mu[1] as f64]);
                let du = u.forward_diff(mu);
                for (o, d) in out.values_mut().chunks_mut(2).zip(du.values().chunks(2)) {
                    let dot = d[0].scale(g[0]) + d[1].scale(g[1]);
                    o[0] += (d[0].scale(alpha) + dot.scale(beta * g[0])).scale(inv);
                    o[1] += (d[1].scale(alpha) + dot.scale(beta * g[1])).scale(inv);
                }
            }
        }
        Ok(out)
    }

    /// Linear atomistic force (κ-form) for any scalar type.
    pub fn linear_force_atomistic<T: Scalar>(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.linear_force(&self.atomistic_coefficients(), u)
    }

    /// Atomistic force; nonlinear for pair-potential models.
    pub fn force_atomistic(&self, u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
        match self {
            Model::PairPotentialTriangular(p) => pair_force(p, u),
            _ => self.linear_force_atomistic(u),
        }
    }

    pub fn force_continuum<T: Scalar>(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.linear_force(&self.continuum_coefficients(), u)
    }

    /// `(1 − ϱ) F_at[u] + ϱ F_ε[u]` with a sharp indicator.
    pub fn force_hybrid(&self, u: &GridFunction<f64>, region: Region) -> Result<GridFunction<f64>> {
        let fa = self.force_atomistic(u)?;
        let fc = self.force_continuum(u)?;
        Ok(select_region(u.grid(), region, &fa, &fc))
    }

    /// Jacobian action `F'[u] w` of the (possibly nonlinear) atomistic force.
    pub fn jacobian_atomistic(&self, u: &GridFunction<f64>, w: &GridFunction<f64>) -> Result<GridFunction<f64>> {
        match self {
            Model::PairPotentialTriangular(p) => pair_jacobian(p, u, w),
            _ => self.linear_force_atomistic(w),
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, Model::PairPotentialTriangular(_))
    }
}

pub(crate) fn select_region(
    grid: &Grid,
    region: Region,
    fa: &GridFunction<f64>,
    fc: &GridFunction<f64>,
) -> GridFunction<f64> {
    let m = fa.components();
    let mut out = fa.clone();
    let vals = out.values_mut();
    for lin in 0..grid.len() {
        if region.is_continuum(grid, &grid.multi_index(lin)) {
            vals[lin * m..(lin + 1) * m].copy_from_slice(fc.point(lin));
        }
    }
    out
}

fn check_field<T: Scalar>(u: &GridFunction<T>) -> Result<()> {
    if u.components() != 2 || u.grid().dim() != 2 {
        return Err(Error::ComponentMismatch {
            expected: 2,
            got: u.components(),
        });
    }
    Ok(())
}

/// `F[u](x) = (2/ε) Σ_μ φ'(|r|) r/|r|`, `r = μ_geo + D⁺_μ u(x)`.
fn pair_force(p: &PairModel, u: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    check_field(u)?;
    let lattice = Lattice::triangular();
    let shells = NeighborShells::triangular();
    let inv = 1.0 / u.grid().eps();
    let mut out = GridFunction::<f64>::zeros(u.grid(), 2);
    for s in 0..2 {
        let phi = &p.potentials[s];
        for mu in shells.shell(s) {
            let g = lattice.cartesian(&[mu[0] as f64, mu[1] as f64]);
            let du = u.forward_diff(mu);
            for (o, d) in out.values_mut().chunks_mut(2).zip(du.values().chunks(2)) {
                let r = [g[0] + d[0], g[1] + d[1]];
                let len = (r[0] * r[0] + r[1] * r[1]).sqrt();
                let f = 2.0 * phi.d1(len) / len * inv;
                o[0] += f * r[0];
                o[1] += f * r[1];
            }
        }
    }
    Ok(out)
}

fn pair_jacobian(p: &PairModel, u: &GridFunction<f64>, w: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    check_field(u)?;
    check_field(w)?;
    let lattice = Lattice::triangular();
    let shells = NeighborShells::triangular();
    let inv = 1.0 / u.grid().eps();
    let mut out = GridFunction::<f64>::zeros(u.grid(), 2);
    for s in 0..2 {
        let phi = &p.potentials[s];
        for mu in shells.shell(s) {
            let g = lattice.cartesian(&[mu[0] as f64, mu[1] as f64]);
            let du = u.forward_diff(mu);
            let dw = w.forward_diff(mu);
            for ((o, d), e) in out
                .values_mut()
                .chunks_mut(2)
                .zip(du.values().chunks(2))
                .zip(dw.values().chunks(2))
            {
                let r = [g[0] + d[0], g[1] + d[1]];
                let len = (r[0] * r[0] + r[1] * r[1]).sqrt();
                let a = phi.d1(len) / len;
                let b = (phi.d2(len) - a) / (len * len);
                let dot = r[0] * e[0] + r[1] * e[1];
                o[0] += 2.0 * inv * (a * e[0] + b * dot * r[0]);
                o[1] += 2.0 * inv * (a * e[1] + b * dot * r[1]);
            }
        }
    }
    Ok(out)
}

const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Cell averages of `f` over `x + εΓ`, `Γ` the primitive cell, projected to zero mean.
pub fn cell_average(
    grid: &Grid,
    components: usize,
    f: impl Fn(&[f64]) -> Vec<f64>,
) -> GridFunction<f64> {
    let d = grid.dim();
    let eps = grid.eps();
    let nodes = GAUSS4.len().pow(d as u32);
    let raw = GridFunction::<f64>::from_fn(grid, components, |nu, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..nodes {
            let mut rem = q;
            let mut w = 1.0;
            let mut t = vec![0.0; d];
            for (j, tj) in t.iter_mut().enumerate() {
                let (node, weight) = GAUSS4[rem % GAUSS4.len()];
                rem /= GAUSS4.len();
                *tj = eps * (nu[j] as f64 + node);
                w *= weight;
            }
            let x = grid.lattice().cartesian(&t);
            for (o, v) in out.iter_mut().zip(f(&x)) {
                *o += w * v;
            }
        }
    });
    raw.project_zero_mean()
}

/// One trigonometric load term: `amplitude · sin(2π k·t)` in component `component`,
/// `t` the lattice coordinates of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadMode {
    pub component: usize,
    pub k: [i64; 2],
    pub amplitude: f64,
}

/// Evaluates a trigonometric load at Cartesian `x` on lattice `lattice`.
pub fn load_value(lattice: &Lattice, modes: &[LoadMode], components: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; components];
    // t = A^{-T}... coordinates from the reciprocal basis: t_j = b_j·x / 2π
    let t: Vec<f64> = lattice
        .reciprocal()
        .iter()
        .map(|b| b.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>() / (2.0 * PI))
        .collect();
    for m in modes {
        let ph = 2.0 * PI * (m.k[0] as f64 * t[0] + m.k[1] as f64 * t[1]);
        if m.component < components {
            out[m.component] += m.amplitude * ph.sin();
        }
    }
    out
}

/// Plane wave `e_c e^{i2πε k·ν}` on `grid`.
pub fn plane_wave(grid: &Grid, components: usize, c: usize, k: &[i64]) -> GridFunction<Complex64> {
    GridFunction::from_fn(grid, components, |nu, out| {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let ph: i64 = nu.iter().zip(k).map(|(a, b)| a * b).sum();
        out[c] = Complex64::from_polar(1.0, 2.0 * PI * grid.eps() * ph as f64);
    })
}

/// Scalar identity-matrix helper.
#[cfg(test)]
pub(crate) fn eye(n: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::identity(n, n)
}
