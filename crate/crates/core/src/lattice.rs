//! Bravais lattices, periodic grids and lattice functions.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<f64>>,
    reciprocal: Vec<Vec<f64>>,
}

impl Lattice {
    /// Builds a lattice from `d` basis vectors of length `d`.
    pub fn new(basis: &[Vec<f64>]) -> Result<Self> {
        let d = basis.len();
        if !(1..=3).contains(&d) || basis.iter().any(|a| a.len() != d) {
            return Err(Error::InvalidInput(format!(
                "basis must be d vectors of length d with d in 1..=3, got {d}"
            )));
        }
        let a = nalgebra::DMatrix::from_fn(d, d, |i, j| basis[i][j]);
        let det = a.determinant();
        if det.abs() <= 1e-12 || !det.is_finite() {
            return Err(Error::DegenerateLattice(det.abs()));
        }
        // rows of B = 2π A^{-T}
        let inv = a.try_inverse().ok_or(Error::DegenerateLattice(det.abs()))?;
        let b = inv.transpose() * (2.0 * PI);
        let reciprocal = (0..d).map(|i| (0..d).map(|j| b[(i, j)]).collect()).collect();
        Ok(Self {
            dim: d,
            basis: basis.to_vec(),
            reciprocal,
        })
    }

    pub fn square() -> Self {
        Self::new(&[vec![1.0, 0.0], vec![0.0, 1.0]]).expect("square basis")
    }

    pub fn triangular() -> Self {
        Self::new(&[vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).expect("triangular basis")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn reciprocal(&self) -> &[Vec<f64>] {
        &self.reciprocal
    }

    /// Cartesian position of `Σ t_j a_j`.
    pub fn cartesian(&self, t: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (tj, a) in t.iter().zip(&self.basis) {
            for (xi, ai) in x.iter_mut().zip(a) {
                *xi += tj * ai;
            }
        }
        x
    }

    /// Cartesian wavevector `Σ k_j b_j`.
    pub fn wavevector(&self, k: &[f64]) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim];
        for (kj, b) in k.iter().zip(&self.reciprocal) {
            for (x, bi) in xi.iter_mut().zip(b) {
                *x += kj * bi;
            }
        }
        xi
    }

    /// Largest eigenvalue of `AᵀA`, i.e. `max Σ_j (a_j·ξ)² / |ξ|²`.
    pub fn pairing_bound(&self) -> f64 {
        let d = self.dim;
        let a = nalgebra::DMatrix::from_fn(d, d, |i, j| self.basis[i][j]);
        let g = a.transpose() * a;
        g.symmetric_eigenvalues().max()
    }
}

/// Canonical pairings `a_j·ξ = 2π k_j` for reciprocal coefficients `k`.
pub fn pairings(k: &[f64]) -> Vec<f64> {
    k.iter().map(|kj| 2.0 * PI * kj).collect()
}

/// `Λ²_{0,ε}(ξ) = Σ_j 4/ε² sin²(ε ξ_j / 2)` with `ξ_j` the pairings.
pub fn lambda0_sq(xi: &[f64], eps: f64) -> f64 {
    xi.iter()
        .map(|x| {
            let s = (0.5 * eps * x).sin();
            4.0 * s * s / (eps * eps)
        })
        .sum()
}

pub fn lambda_sq(xi: &[f64], eps: f64) -> f64 {
    1.0 + lambda0_sq(xi, eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lattice: Lattice,
    n_half: usize,
}

impl Grid {
    pub fn new(lattice: Lattice, n_half: usize) -> Result<Self> {
        if n_half == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        Ok(Self { lattice, n_half })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    /// Points per axis, `2N`.
    pub fn side(&self) -> usize {
        2 * self.n_half
    }

    pub fn eps(&self) -> f64 {
        1.0 / self.side() as f64
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Linear index of the (wrapped) multi-index `nu`.
    pub fn index(&self, nu: &[i64]) -> usize {
        let s = self.side() as i64;
        nu.iter()
            .fold(0usize, |acc, &v| acc * self.side() + v.rem_euclid(s) as usize)
    }

    pub fn multi_index(&self, mut lin: usize) -> Vec<i64> {
        let s = self.side();
        let mut nu = vec![0i64; self.dim()];
        for v in nu.iter_mut().rev() {
            *v = (lin % s) as i64;
            lin /= s;
        }
        nu
    }

    /// Cartesian position `ε Σ ν_j a_j`.
    pub fn position(&self, nu: &[i64]) -> Vec<f64> {
        let t: Vec<f64> = nu.iter().map(|&v| v as f64 * self.eps()).collect();
        self.lattice.cartesian(&t)
    }

    /// Reciprocal coefficients `k ∈ [−N, N)^d` of spectral slot `lin`.
    pub fn wave_index(&self, lin: usize) -> Vec<i64> {
        let n = self.n_half as i64;
        self.multi_index(lin).into_iter().map(|v| v - n).collect()
    }

    pub fn spectral_index(&self, k: &[i64]) -> usize {
        let n = self.n_half as i64;
        let shifted: Vec<i64> = k.iter().map(|&v| (v + n).rem_euclid(2 * n)).collect();
        self.index(&shifted)
    }
}

/// Field element type: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn scale(self, s: f64) -> Self;
    fn modulus_sq(self) -> f64;
    fn to_complex(self) -> Complex64;
    fn from_complex(z: Complex64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn modulus_sq(self) -> f64 {
        self * self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn modulus_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
}

/// Periodic lattice field with `components` values per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Scalar> {
    grid: Grid,
    components: usize,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Self {
            grid: grid.clone(),
            components,
            values: vec![T::zero(); grid.len() * components],
        }
    }

    pub fn from_values(grid: &Grid, components: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() * components {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                grid.len() * components,
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            components,
            values,
        })
    }

    /// Fills each point from `f(ν, out)`.
    pub fn from_fn(grid: &Grid, components: usize, mut f: impl FnMut(&[i64], &mut [T])) -> Self {
        let mut u = Self::zeros(grid, components);
        for lin in 0..grid.len() {
            let nu = grid.multi_index(lin);
            f(&nu, &mut u.values[lin * components..(lin + 1) * components]);
        }
        u
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn at(&self, nu: &[i64]) -> &[T] {
        let i = self.grid.index(nu) * self.components;
        &self.values[i..i + self.components]
    }

    pub fn point(&self, lin: usize) -> &[T] {
        &self.values[lin * self.components..(lin + 1) * self.components]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.components != other.components {
            return Err(Error::ComponentMismatch {
                expected: self.components,
                got: other.components,
            });
        }
        Ok(())
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v.scale(s))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> GridFunction<U> {
        GridFunction {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_complex(&self) -> GridFunction<Complex64> {
        self.map(|v| v.to_complex())
    }

    /// `(T^μ u)(ν) = u(ν + μ)`.
    pub fn translate(&self, mu: &[i64]) -> Self {
        let m = self.components;
        let mut out = Self::zeros(&self.grid, m);
        let mut shifted = vec![0i64; mu.len()];
        for lin in 0..self.grid.len() {
            let nu = self.grid.multi_index(lin);
            for ((s, n), d) in shifted.iter_mut().zip(&nu).zip(mu) {
                *s = n + d;
            }
            let src = self.grid.index(&shifted);
            out.values[lin * m..(lin + 1) * m]
                .copy_from_slice(&self.values[src * m..(src + 1) * m]);
        }
        out
    }

    /// `ε⁻¹(T^μ − I)u`.
    pub fn forward_diff(&self, mu: &[i64]) -> Self {
        let inv = 1.0 / self.grid.eps();
        let t = self.translate(mu);
        let values = t
            .values
            .iter()
            .zip(&self.values)
            .map(|(&a, &b)| (a - b).scale(inv))
            .collect();
        Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        }
    }

    /// `ε⁻¹(I − T^{−μ})u`.
    pub fn backward_diff(&self, mu: &[i64]) -> Self {
        let inv = 1.0 / self.grid.eps();
        let neg: Vec<i64> = mu.iter().map(|v| -v).collect();
        let t = self.translate(&neg);
        let values = self
            .values
            .iter()
            .zip(&t.values)
            .map(|(&a, &b)| (a - b).scale(inv))
            .collect();
        Self {
            grid: self.grid.clone(),
            components: self.components,
            values,
        }
    }

    /// `Π_j (D⁺_{e_j})^{α_j} u`.
    pub fn multi_diff(&self, alpha: &[usize]) -> Self {
        let d = self.grid.dim();
        let mut out = self.clone();
        for (j, &aj) in alpha.iter().enumerate() {
            let mut e = vec![0i64; d];
            e[j] = 1;
            for _ in 0..aj {
                out = out.forward_diff(&e);
            }
        }
        out
    }

    /// `ε^d Σ_x u(x)` per component.
    pub fn mean(&self) -> Vec<T> {
        let m = self.components;
        let mut acc = vec![T::zero(); m];
        for chunk in self.values.chunks(m) {
            for (a, &v) in acc.iter_mut().zip(chunk) {
                *a += v;
            }
        }
        let w = 1.0 / self.grid.len() as f64;
        acc.into_iter().map(|a| a.scale(w)).collect()
    }

    pub fn project_zero_mean(&self) -> Self {
        let mean = self.mean();
        let m = self.components;
        let mut out = self.clone();
        for chunk in out.values.chunks_mut(m) {
            for (v, &c) in chunk.iter_mut().zip(&mean) {
                *v -= c;
            }
        }
        out
    }

    fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v.modulus_sq()).sum()
    }

    fn max_abs(&self) -> f64 {
        self.values
            .chunks(self.components)
            .map(|c| c.iter().map(|v| v.modulus_sq()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `‖u‖_{ε,k} = (Σ_{|α|≤k} ε^d Σ_x |D^α u|²)^{1/2}`.
    pub fn norm_hk(&self, k: usize) -> f64 {
        let w = self.grid.eps().powi(self.grid.dim() as i32);
        multi_indices(self.grid.dim(), k)
            .iter()
            .map(|alpha| w * self.multi_diff(alpha).sum_sq())
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_{|α|≤k} max_x |D^α u(x)|`.
    pub fn norm_winf(&self, k: usize) -> f64 {
        multi_indices(self.grid.dim(), k)
            .iter()
            .map(|alpha| self.multi_diff(alpha).max_abs())
            .sum()
    }

    pub fn norm_linf(&self) -> f64 {
        self.max_abs()
    }

    /// `û(ξ) = (ε/2π)^d Σ_x e^{−iξ·x} u(x)`.
    pub fn dft(&self) -> SpectralFunction {
        let mut data: Vec<Complex64> = self.values.iter().map(|v| v.to_complex()).collect();
        transform(&self.grid, self.components, &mut data, -1.0);
        let s = (self.grid.eps() / (2.0 * PI)).powi(self.grid.dim() as i32);
        data.iter_mut().for_each(|v| *v *= s);
        SpectralFunction {
            grid: self.grid.clone(),
            components: self.components,
            coeffs: data,
        }
    }
}

impl GridFunction<Complex64> {
    pub fn real_part(&self) -> GridFunction<f64> {
        self.map(|v| v.re)
    }
}

/// All multi-indices `α ∈ N^d` with `|α| ≤ k`, ordered by total degree.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=k {
        let mut cur = vec![0usize; d];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill(out, cur, pos + 1, left - v);
    }
}

/// Unnormalized separable transform. Input indexed by ν ∈ [0,2N)^d, output by k+N.
/// `sign = −1` gives Σ_ν e^{−2πi k·ν/2N} u(ν); `sign = +1` is the reverse direction
/// (input indexed by k+N, output by ν).
fn transform(grid: &Grid, m: usize, data: &mut [Complex64], sign: f64) {
    let s = grid.side();
    let n = grid.n_half() as i64;
    let d = grid.dim();
    let twiddle: Vec<Complex64> = (0..s)
        .map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / s as f64))
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); s];
    let mut out = vec![Complex64::new(0.0, 0.0); s];
    for axis in 0..d {
        let stride = s.pow((d - 1 - axis) as u32);
        let outer = grid.len() / (s * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * s * stride + inner;
                for c in 0..m {
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = data[(base + j * stride) * m + c];
                    }
                    for (r, slot) in out.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, l) in line.iter().enumerate() {
                            // forward: r = k+N, j = ν ; inverse: r = ν, j = k+N
                            let (k, nu) = if sign < 0.0 {
                                (r as i64 - n, j as i64)
                            } else {
                                (j as i64 - n, r as i64)
                            };
                            let e = (k * nu).rem_euclid(s as i64) as usize;
                            acc += l * twiddle[e];
                        }
                        *slot = acc;
                    }
                    for (j, v) in out.iter().enumerate() {
                        data[(base + j * stride) * m + c] = *v;
                    }
                }
            }
        }
    }
}

/// Coefficients `û(ξ)` for `ξ = Σ k_j b_j`, `k ∈ [−N, N)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: Grid,
    components: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Self {
            grid: grid.clone(),
            components,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len() * components],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> &[Complex64] {
        let i = self.grid.spectral_index(k) * self.components;
        &self.coeffs[i..i + self.components]
    }

    pub fn coeff_mut(&mut self, k: &[i64]) -> &mut [Complex64] {
        let i = self.grid.spectral_index(k) * self.components;
        &mut self.coeffs[i..i + self.components]
    }

    /// `u(x) = (2π)^d Σ_ξ e^{iξ·x} û(ξ)`.
    pub fn idft(&self) -> GridFunction<Complex64> {
        let mut data = self.coeffs.clone();
        transform(&self.grid, self.components, &mut data, 1.0);
        let s = (2.0 * PI).powi(self.grid.dim() as i32);
        data.iter_mut().for_each(|v| *v *= s);
        GridFunction {
            grid: self.grid.clone(),
            components: self.components,
            values: data,
        }
    }

    /// Spectral form of `‖u‖_{ε,k}`: `(2π)^{2d} Σ_ξ Σ_{|α|≤k} Π_j Λ_j^{2α_j} |û(ξ)|²`.
    pub fn norm_hk(&self, k: usize) -> f64 {
        let d = self.grid.dim();
        let eps = self.grid.eps();
        let alphas = multi_indices(d, k);
        let m = self.components;
        let mut acc = 0.0;
        for lin in 0..self.grid.len() {
            let kk = self.grid.wave_index(lin);
            let lam: Vec<f64> = kk
                .iter()
                .map(|&kj| {
                    let s = (PI * eps * kj as f64).sin();
                    4.0 * s * s / (eps * eps)
                })
                .collect();
            let w: f64 = alphas
                .iter()
                .map(|a| a.iter().zip(&lam).map(|(&aj, l)| l.powi(aj as i32)).product::<f64>())
                .sum();
            let mag: f64 = self.coeffs[lin * m..(lin + 1) * m]
                .iter()
                .map(|c| c.norm_sqr())
                .sum();
            acc += w * mag;
        }
        ((2.0 * PI).powi(2 * d as i32) * acc).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri_grid(n: usize) -> Grid {
        Grid::new(Lattice::triangular(), n).unwrap()
    }

    #[test]
    fn reciprocal_bases() {
        let sq = Lattice::square();
        assert!((sq.reciprocal()[0][0] - 2.0 * PI).abs() < 1e-12);
        assert!(sq.reciprocal()[0][1].abs() < 1e-12);
        let t = Lattice::triangular();
        let b = t.reciprocal();
        assert!((b[0][0] - 2.0 * PI).abs() < 1e-12);
        assert!((b[0][1] + 2.0 * PI / 3f64.sqrt()).abs() < 1e-12);
        assert!(b[1][0].abs() < 1e-12);
        assert!((b[1][1] - 4.0 * PI / 3f64.sqrt()).abs() < 1e-12);
        for j in 0..2 {
            for k in 0..2 {
                let dot: f64 = t.basis()[j].iter().zip(&b[k]).map(|(x, y)| x * y).sum();
                let want = if j == k { 2.0 * PI } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn collinear_basis_is_degenerate() {
        let err = Lattice::new(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateLattice(_)));
        assert!(err.to_string().contains("degenerate lattice"));
    }

    #[test]
    fn index_wraps() {
        let g = tri_grid(3);
        assert_eq!(g.index(&[1, 2]), g.index(&[7, -4]));
        assert_eq!(g.multi_index(g.index(&[4, 5])), vec![4, 5]);
    }

    #[test]
    fn translate_group() {
        let g = tri_grid(3);
        let u = GridFunction::<f64>::from_fn(&g, 2, |nu, out| {
            out[0] = nu[0] as f64 + 0.1 * nu[1] as f64;
            out[1] = (nu[0] * nu[1]) as f64;
        });
        assert_eq!(u.translate(&[0, 0]), u);
        assert_eq!(u.translate(&[2, -1]).translate(&[-2, 1]), u);
        assert_eq!(u.translate(&[6, 0]), u);
    }

    #[test]
    fn differences() {
        let g = tri_grid(4);
        let c = GridFunction::<f64>::from_fn(&g, 1, |_, o| o[0] = 3.5);
        assert!(c.forward_diff(&[1, 1]).values().iter().all(|v| *v == 0.0));
        // linear in index space, checked away from the seam
        let u = GridFunction::<f64>::from_fn(&g, 1, |nu, o| {
            let x = g.position(nu);
            o[0] = 2.0 * x[0] - 0.5 * x[1];
        });
        let mu = [1i64, -1];
        let geo = g.lattice().cartesian(&[1.0, -1.0]);
        let want = 2.0 * geo[0] - 0.5 * geo[1];
        let du = u.forward_diff(&mu);
        for a in 1..5 {
            for b in 2..5 {
                assert!((du.at(&[a, b])[0] - want).abs() < 1e-9);
            }
        }
        let r = GridFunction::<f64>::from_fn(&g, 1, |nu, o| o[0] = ((nu[0] * 7 + nu[1] * 3) % 5) as f64);
        let ab = r.forward_diff(&[1, 0]).forward_diff(&[0, 1]);
        let ba = r.forward_diff(&[0, 1]).forward_diff(&[1, 0]);
        for (x, y) in ab.values().iter().zip(ba.values()) {
            assert!((x - y).abs() < 1e-9);
        }
        let bd = r.backward_diff(&[1, 0]);
        assert_eq!(bd.values(), r.forward_diff(&[1, 0]).translate(&[-1, 0]).values());
    }

    #[test]
    fn dft_of_constant_and_plane_wave() {
        let g = tri_grid(3);
        let c = GridFunction::<f64>::from_fn(&g, 1, |_, o| o[0] = 2.0);
        let s = c.dft();
        let want = 2.0 / (2.0 * PI).powi(2);
        assert!((s.coeff(&[0, 0])[0].re - want).abs() < 1e-14);
        for lin in 0..g.len() {
            let k = g.wave_index(lin);
            if k != vec![0, 0] {
                assert!(s.coeffs()[lin].norm() < 1e-14);
            }
        }
        let k0 = [1i64, -2];
        let pw = GridFunction::<Complex64>::from_fn(&g, 1, |nu, o| {
            let ph = 2.0 * PI * g.eps() * (k0[0] * nu[0] + k0[1] * nu[1]) as f64;
            o[0] = Complex64::from_polar(1.0, ph);
        });
        let s = pw.dft();
        for lin in 0..g.len() {
            let k = g.wave_index(lin);
            let want = if k == k0 { 1.0 / (2.0 * PI).powi(2) } else { 0.0 };
            assert!((s.coeffs()[lin] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn norms_of_constants() {
        let g = tri_grid(4);
        let z = GridFunction::<f64>::zeros(&g, 2);
        assert_eq!(z.norm_hk(2), 0.0);
        let c = GridFunction::<f64>::from_fn(&g, 1, |_, o| o[0] = -1.5);
        assert!((c.norm_hk(0) - 1.5).abs() < 1e-14);
        assert!((c.norm_hk(2) - 1.5).abs() < 1e-14);
        assert!((c.norm_winf(1) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn h1_of_plane_wave() {
        let g = tri_grid(4);
        let k0 = [2i64, -1];
        let pw = GridFunction::<Complex64>::from_fn(&g, 1, |nu, o| {
            let ph = 2.0 * PI * g.eps() * (k0[0] * nu[0] + k0[1] * nu[1]) as f64;
            o[0] = Complex64::from_polar(1.0, ph);
        });
        let xi = pairings(&[2.0, -1.0]);
        let want = lambda_sq(&xi, g.eps()).sqrt();
        assert!((pw.norm_hk(1) - want).abs() < 1e-10);
        assert!((pw.dft().norm_hk(1) - want).abs() < 1e-10);
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_sq(&[0.0, 0.0], 0.1), 1.0);
        let eps = 0.125;
        let xi = [PI / eps, PI / eps];
        assert!((lambda_sq(&xi, eps) - (1.0 + 8.0 / (eps * eps))).abs() < 1e-9);
    }

    #[test]
    fn projection() {
        let g = tri_grid(3);
        let c = GridFunction::<f64>::from_fn(&g, 2, |_, o| {
            o[0] = 1.0;
            o[1] = -4.0;
        });
        assert!(c.project_zero_mean().values().iter().all(|v| v.abs() < 1e-15));
        let r = GridFunction::<f64>::from_fn(&g, 1, |nu, o| o[0] = (nu[0] * nu[0] + nu[1]) as f64);
        let p = r.project_zero_mean();
        assert!(p.mean()[0].abs() < 1e-13);
        let pp = p.project_zero_mean();
        for (a, b) in p.values().iter().zip(pp.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 1).len(), 4);
        assert_eq!(multi_indices(2, 0), vec![vec![0, 0]]);
    }
}
