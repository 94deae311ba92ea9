//! Constant-coefficient difference operators and their symbols.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{GridFunction, Lattice, Scalar};

pub type CMatrix = DMatrix<Complex64>;

/// Finite map from integer offsets to `block × block` real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    dim: usize,
    block: usize,
    entries: BTreeMap<Vec<i64>, DMatrix<f64>>,
}

impl Stencil {
    pub fn new(dim: usize, block: usize) -> Self {
        Self {
            dim,
            block,
            entries: BTreeMap::new(),
        }
    }

    /// Builds from `(offset, matrix)` pairs, summing duplicates and dropping zeros.
    pub fn from_entries(
        dim: usize,
        block: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, DMatrix<f64>)>,
    ) -> Result<Self> {
        let mut s = Self::new(dim, block);
        for (mu, c) in entries {
            s.add(mu, c)?;
        }
        s.prune();
        Ok(s)
    }

    /// Pair-form stencil: every bond `μ` contributes `scale·(αI + β μ_geo μ_geoᵀ)` at `μ`
    /// and its negative at the origin.
    pub fn from_bonds(lattice: &Lattice, bonds: &[(Vec<i64>, f64, f64)], scale: f64) -> Self {
        let d = lattice.dim();
        let mut s = Self::new(d, d);
        let origin = vec![0i64; d];
        for (mu, alpha, beta) in bonds {
            let t: Vec<f64> = mu.iter().map(|&v| v as f64).collect();
            let g = nalgebra::DVector::from_vec(lattice.cartesian(&t));
            let c = (DMatrix::identity(d, d) * *alpha + &g * g.transpose() * *beta) * scale;
            s.add(mu.clone(), c).expect("bond offset dimension");
        }
        s.prune();
        // center is minus the off-center sum, accumulated in `row_sum` order so the total cancels exactly
        let center = -s.off_center_sum();
        s.entries.remove(&origin);
        s.add(origin, center).expect("bond offset dimension");
        s.prune();
        s
    }

    fn off_center_sum(&self) -> DMatrix<f64> {
        self.entries
            .iter()
            .filter(|(mu, _)| mu.iter().any(|&v| v != 0))
            .fold(DMatrix::zeros(self.block, self.block), |acc, (_, c)| acc + c)
    }

    pub fn add(&mut self, mu: Vec<i64>, c: DMatrix<f64>) -> Result<()> {
        if mu.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "offset {mu:?} has wrong dimension (expected {})",
                self.dim
            )));
        }
        if c.nrows() != self.block || c.ncols() != self.block {
            return Err(Error::ComponentMismatch {
                expected: self.block,
                got: c.nrows(),
            });
        }
        match self.entries.get_mut(&mu) {
            Some(e) => *e += c,
            None => {
                self.entries.insert(mu, c);
            }
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.entries.retain(|_, c| c.iter().any(|v| *v != 0.0));
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i64>, &DMatrix<f64>)> {
        self.entries.iter()
    }

    pub fn coeff(&self, mu: &[i64]) -> Option<&DMatrix<f64>> {
        self.entries.get(mu)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.entries.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    /// Re-indexes offsets; coefficients of colliding offsets are summed.
    pub fn map_offsets(&self, f: impl Fn(&[i64]) -> Vec<i64>) -> Self {
        let mut out = Self::new(self.dim, self.block);
        for (mu, c) in &self.entries {
            out.add(f(mu), c.clone()).expect("offset map keeps dimension");
        }
        out.prune();
        out
    }

    /// `(min, max)` of offset coordinate `axis` over the support.
    pub fn extent(&self, axis: usize) -> Option<(i64, i64)> {
        let mut it = self.entries.keys().map(|mu| mu[axis]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Extent along `axis` of matrix entry `(i, j)`; `None` if that entry vanishes.
    pub fn entry_extent(&self, axis: usize, i: usize, j: usize) -> Option<(i64, i64)> {
        let mut it = self
            .entries
            .iter()
            .filter(|(_, c)| c[(i, j)] != 0.0)
            .map(|(mu, _)| mu[axis]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    pub fn row_sum(&self) -> DMatrix<f64> {
        let origin = vec![0i64; self.dim];
        match self.entries.get(&origin) {
            Some(c) => self.off_center_sum() + c,
            None => self.off_center_sum(),
        }
    }

    /// `Σ_μ C(μ) Π_j w_j^{μ_j}`.
    pub fn evaluate(&self, phases: &[Complex64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.block, self.block);
        for (mu, c) in &self.entries {
            let w: Complex64 = mu
                .iter()
                .zip(phases)
                .map(|(&m, &p)| p.powi(m as i32))
                .product();
            out += c.map(|v| w * v);
        }
        out
    }

    /// Symbol `Σ_μ C(μ) e^{i2πε μ·k}` for reciprocal coefficients `k`.
    pub fn symbol(&self, eps: f64, k: &[f64]) -> CMatrix {
        // Σ C(μ)(e^{iφ} − 1) + row sum: no cancellation near ξ = 0
        let mut out = self.row_sum().map(|v| Complex64::new(v, 0.0));
        for (mu, c) in self.entries.iter().filter(|(mu, _)| mu.iter().any(|&v| v != 0)) {
            let ph = 2.0 * PI * eps * mu.iter().zip(k).map(|(&m, kj)| m as f64 * kj).sum::<f64>();
            let w = Complex64::new(-2.0 * (0.5 * ph).sin().powi(2), ph.sin());
            out += c.map(|v| w * v);
        }
        out
    }

    /// Second-moment limit `−½ ε² Σ_μ C(μ) (2π μ·k)²` of a stencil whose coefficients scale as `ε⁻²`.
    pub fn quadratic_limit(&self, eps: f64, k: &[f64]) -> CMatrix {
        let mut out = DMatrix::<f64>::zeros(self.block, self.block);
        for (mu, c) in &self.entries {
            let p: f64 = 2.0 * PI * mu.iter().zip(k).map(|(&m, kj)| m as f64 * kj).sum::<f64>();
            out += c * (-0.5 * eps * eps * p * p);
        }
        out.map(|v| Complex64::new(v, 0.0))
    }

    /// Quadratic-limit coefficients `(Q_ss, Q_st, Q_tt)` such that the limit symbol in pairings
    /// `(s, t)` along offset axes `(0, 1)` equals `Q_ss s² + 2 Q_st s t + Q_tt t²`.
    pub fn quadratic_form_2d(&self, eps: f64) -> [DMatrix<f64>; 3] {
        let mut q = [
            DMatrix::zeros(self.block, self.block),
            DMatrix::zeros(self.block, self.block),
            DMatrix::zeros(self.block, self.block),
        ];
        for (mu, c) in &self.entries {
            let (a, b) = (mu[0] as f64, mu[1] as f64);
            let w = -0.5 * eps * eps;
            q[0] += c * (w * a * a);
            q[1] += c * (w * a * b);
            q[2] += c * (w * b * b);
        }
        q
    }

    /// Laurent coefficients in `z = T^{e_0}` with the remaining axes evaluated at `tangential`.
    pub fn laurent(&self, tangential: &[Complex64]) -> BTreeMap<i64, CMatrix> {
        let mut out: BTreeMap<i64, CMatrix> = BTreeMap::new();
        for (mu, c) in &self.entries {
            let w: Complex64 = mu[1..]
                .iter()
                .zip(tangential)
                .map(|(&m, &p)| p.powi(m as i32))
                .product();
            let term = c.map(|v| w * v);
            out.entry(mu[0])
                .and_modify(|e| *e += &term)
                .or_insert(term);
        }
        out
    }

    /// Applies `(Lu)(ν) = Σ_μ C(μ) u(ν+μ)` with periodic wrap.
    pub fn apply<T: Scalar>(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        if u.components() != self.block {
            return Err(Error::ComponentMismatch {
                expected: self.block,
                got: u.components(),
            });
        }
        if u.grid().dim() != self.dim {
            return Err(Error::GridMismatch);
        }
        let grid = u.grid();
        let m = self.block;
        let mut out = GridFunction::<T>::zeros(grid, m);
        let mut shifted = vec![0i64; self.dim];
        let src = u.values();
        let dst = out.values_mut();
        for lin in 0..grid.len() {
            let nu = grid.multi_index(lin);
            for (mu, c) in &self.entries {
                for ((s, n), d) in shifted.iter_mut().zip(&nu).zip(mu) {
                    *s = n + d;
                }
                let j = grid.index(&shifted);
                for r in 0..m {
                    let mut acc = T::zero();
                    for col in 0..m {
                        acc += src[j * m + col].scale(c[(r, col)]);
                    }
                    dst[lin * m + r] += acc;
                }
            }
        }
        Ok(out)
    }

    /// If every coefficient is a multiple of the identity, the scalar stencil of multipliers.
    pub fn scalar_reduction(&self) -> Option<Stencil> {
        let mut out = Stencil::new(self.dim, 1);
        for (mu, c) in &self.entries {
            let s = c[(0, 0)];
            let scale = c.amax().max(1.0);
            for i in 0..self.block {
                for j in 0..self.block {
                    let want = if i == j { s } else { 0.0 };
                    if (c[(i, j)] - want).abs() > 1e-14 * scale {
                        return None;
                    }
                }
            }
            out.entries.insert(mu.clone(), DMatrix::from_element(1, 1, s));
        }
        Some(out)
    }
}

/// Largest `|h − hᴴ|` entry.
pub fn hermitian_defect(h: &CMatrix) -> f64 {
    let diff = h - h.adjoint();
    diff.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_entry(h: &CMatrix) -> f64 {
    h.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
