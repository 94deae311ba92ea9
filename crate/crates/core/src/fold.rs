//! Folding a two-region operator across a planar interface into a one-sided system.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::LaurentMatrix;
use crate::stencil::{CMatrix, Stencil};

/// Normal-direction extents of the continuum and atomistic stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extents {
    pub lo_c: i64,
    pub hi_c: i64,
    pub lo_a: i64,
    pub hi_a: i64,
}

impl Extents {
    /// `Q = ν̄^c − ν̲^a`, the interface overlap width.
    pub fn overlap(&self) -> i64 {
        self.hi_c - self.lo_a
    }
}

fn uniform_extent(s: &Stencil, name: &str) -> Result<(i64, i64)> {
    let overall = s
        .extent(0)
        .ok_or_else(|| Error::InvalidInput(format!("{name} stencil is empty")))?;
    for i in 0..s.block() {
        for j in 0..s.block() {
            if let Some(e) = s.entry_extent(0, i, j) {
                if e != overall {
                    return Err(Error::NonUniformExtents(format!(
                        "{name} entry ({i},{j}) has extent {e:?}, stencil has {overall:?}"
                    )));
                }
            }
        }
    }
    Ok(overall)
}

pub fn compute_extents(atomistic: &Stencil, continuum: &Stencil) -> Result<Extents> {
    let (lo_a, hi_a) = uniform_extent(atomistic, "atomistic")?;
    let (lo_c, hi_c) = uniform_extent(continuum, "continuum")?;
    let e = Extents { lo_c, hi_c, lo_a, hi_a };
    if !(lo_a <= lo_c && lo_c <= 0 && 0 <= hi_c && hi_c <= hi_a) {
        return Err(Error::InvalidExtents([lo_a, lo_c, hi_c, hi_a]));
    }
    Ok(e)
}

/// One scalar boundary condition: `Σ_n c[n] U_c,l(n) + Σ_n a[n] U_a,l(n)` at the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub order: usize,
    pub component: usize,
    pub continuum: BTreeMap<i64, f64>,
    pub atomistic: BTreeMap<i64, f64>,
}

impl BoundaryRow {
    fn build(order: usize, component: usize, q_width: i64, eps: f64) -> Self {
        let scale = eps.powi(-(order as i32));
        let mut continuum = BTreeMap::new();
        let mut atomistic = BTreeMap::new();
        for m in 0..=order {
            let sign = if (order - m).is_multiple_of(2) { 1.0 } else { -1.0 };
            let c = binomial(order, m) * sign * scale;
            continuum.insert(m as i64, c);
            atomistic.insert(q_width - 1 - m as i64, -c);
        }
        Self {
            order,
            component,
            continuum,
            atomistic,
        }
    }

    /// Coefficients with the `ε^{-i}` factor removed.
    pub fn normalized(&self, eps: f64) -> (BTreeMap<i64, f64>, BTreeMap<i64, f64>) {
        let s = eps.powi(self.order as i32);
        (
            self.continuum.iter().map(|(&k, &v)| (k, v * s)).collect(),
            self.atomistic.iter().map(|(&k, &v)| (k, v * s)).collect(),
        )
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One-sided `2·block`-component system with `q` interface conditions.
#[derive(Debug, Clone)]
pub struct FoldedSystem {
    pub block: usize,
    pub eps: f64,
    pub extents: Extents,
    /// Reflected continuum block, offsets `(ν̄^c − m, μ)`.
    pub continuum: Stencil,
    /// Shifted atomistic block, offsets `(m − ν̲^a, μ)`.
    pub atomistic: Stencil,
    pub boundary: Vec<BoundaryRow>,
    pub q: usize,
    pub p: usize,
    pub rho: Vec<i64>,
    pub rho_bar: i64,
    pub rho_star: i64,
    pub sigma: Vec<i64>,
    pub tau: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Continuum,
    Atomistic,
}

pub fn fold(atomistic: &Stencil, continuum: &Stencil, extents: Extents, eps: f64) -> Result<FoldedSystem> {
    if atomistic.block() != continuum.block() || atomistic.dim() != continuum.dim() {
        return Err(Error::ComponentMismatch {
            expected: atomistic.block(),
            got: continuum.block(),
        });
    }
    let d = atomistic.block();
    let Extents { hi_c, lo_a, .. } = extents;
    let lc = continuum.map_offsets(|mu| {
        let mut v = mu.to_vec();
        v[0] = hi_c - mu[0];
        v
    });
    let la = atomistic.map_offsets(|mu| {
        let mut v = mu.to_vec();
        v[0] = mu[0] - lo_a;
        v
    });
    let q_width = extents.overlap();
    let q = d * q_width as usize;
    let boundary: Vec<BoundaryRow> = (0..q)
        .map(|k| BoundaryRow::build(k / d, k % d, q_width, eps))
        .collect();
    let rho = (0..q).map(|k| (k / d) as i64 - 2).collect();
    Ok(FoldedSystem {
        block: d,
        eps,
        extents,
        continuum: lc,
        atomistic: la,
        boundary,
        q,
        p: 2 * d,
        rho,
        rho_bar: 0,
        rho_star: 1,
        sigma: vec![0; 2 * d],
        tau: vec![2; 2 * d],
    })
}

/// Scalar-reduced fold when both stencils are multiples of the identity.
pub fn fold_scalar(atomistic: &Stencil, continuum: &Stencil, eps: f64) -> Option<Result<FoldedSystem>> {
    let a = atomistic.scalar_reduction()?;
    let c = continuum.scalar_reduction()?;
    Some(compute_extents(&a, &c).and_then(|e| fold(&a, &c, e, eps)))
}

impl FoldedSystem {
    pub fn n(&self) -> usize {
        2 * self.block
    }

    pub fn stencil(&self, side: Side) -> &Stencil {
        match side {
            Side::Continuum => &self.continuum,
            Side::Atomistic => &self.atomistic,
        }
    }

    /// Laurent matrix in `z` of one diagonal block at tangential phase `zeta`.
    pub fn block_laurent(&self, side: Side, zeta: Complex64) -> LaurentMatrix {
        LaurentMatrix::new(self.block, self.stencil(side).laurent(&[zeta]))
    }

    /// Full `2d × 2d` folded symbol at `(z, ζ)`.
    pub fn symbol(&self, z: Complex64, zeta: Complex64) -> CMatrix {
        let d = self.block;
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        let c = self.continuum.evaluate(&[z, zeta]);
        let a = self.atomistic.evaluate(&[z, zeta]);
        out.view_mut((0, 0), (d, d)).copy_from(&c);
        out.view_mut((d, d), (d, d)).copy_from(&a);
        out
    }

    /// Window width (x-columns) touched by the boundary rows.
    pub fn boundary_width(&self) -> usize {
        self.extents.overlap() as usize
    }

    /// Largest normal reach of the interior operators.
    pub fn reach(&self) -> usize {
        let c = self.continuum.extent(0).map(|e| e.1).unwrap_or(0);
        let a = self.atomistic.extent(0).map(|e| e.1).unwrap_or(0);
        c.max(a) as usize
    }

    /// Indices of the rows forming `B¹` (first `p`) and `B²` (the rest).
    pub fn partition(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let p = self.p.min(self.q);
        (0..p, p..self.q)
    }
}

/// Field on the folded half-strip `ν ∈ [0, window)`, `μ ∈ [0, ny)`, with `2·block` components.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedField {
    pub block: usize,
    pub window: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl FoldedField {
    pub fn zeros(block: usize, window: usize, ny: usize) -> Self {
        Self {
            block,
            window,
            ny,
            values: vec![0.0; window * ny * 2 * block],
        }
    }

    fn idx(&self, nu: usize, mu: usize, c: usize) -> usize {
        (nu * self.ny + mu) * 2 * self.block + c
    }

    pub fn get(&self, nu: usize, mu: i64, c: usize) -> f64 {
        self.values[self.idx(nu, mu.rem_euclid(self.ny as i64) as usize, c)]
    }

    pub fn set(&mut self, nu: usize, mu: i64, c: usize, v: f64) {
        let i = self.idx(nu, mu.rem_euclid(self.ny as i64) as usize, c);
        self.values[i] = v;
    }
}

/// Field on an unfolded strip `x ∈ [x_lo, x_lo + nx)`, periodic in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripField {
    pub components: usize,
    pub x_lo: i64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl StripField {
    pub fn zeros(components: usize, x_lo: i64, nx: usize, ny: usize) -> Self {
        Self {
            components,
            x_lo,
            nx,
            ny,
            values: vec![0.0; nx * ny * components],
        }
    }

    pub fn x_hi(&self) -> i64 {
        self.x_lo + self.nx as i64 - 1
    }

    fn idx(&self, x: i64, y: i64, c: usize) -> usize {
        let i = (x - self.x_lo) as usize;
        let j = y.rem_euclid(self.ny as i64) as usize;
        (i * self.ny + j) * self.components + c
    }

    pub fn get(&self, x: i64, y: i64, c: usize) -> f64 {
        self.values[self.idx(x, y, c)]
    }

    pub fn set(&mut self, x: i64, y: i64, c: usize, v: f64) {
        let i = self.idx(x, y, c);
        self.values[i] = v;
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.x_lo && x <= self.x_hi()
    }
}

/// `U_c(ν) = u(ν̄^c − 1 − ν)`, `U_a(ν) = u(ν̲^a + ν)`.
pub fn fold_field(sys: &FoldedSystem, u: &StripField, window: usize) -> Result<FoldedField> {
    let d = sys.block;
    if u.components != d {
        return Err(Error::ComponentMismatch {
            expected: d,
            got: u.components,
        });
    }
    let Extents { hi_c, lo_a, .. } = sys.extents;
    let needed_lo = hi_c - window as i64;
    let needed_hi = lo_a + window as i64 - 1;
    if !u.contains(needed_lo) || !u.contains(needed_hi) {
        return Err(Error::WindowTooSmall {
            needed: (needed_hi - needed_lo + 1) as usize,
            have: u.nx,
        });
    }
    let mut out = FoldedField::zeros(d, window, u.ny);
    for nu in 0..window {
        for mu in 0..u.ny as i64 {
            for c in 0..d {
                out.set(nu, mu, c, u.get(hi_c - 1 - nu as i64, mu, c));
                out.set(nu, mu, d + c, u.get(lo_a + nu as i64, mu, c));
            }
        }
    }
    Ok(out)
}

/// Inverse of [`fold_field`] on compatible fields; the overlap is taken from `U_a`.
pub fn unfold_field(sys: &FoldedSystem, f: &FoldedField) -> StripField {
    let d = sys.block;
    let Extents { hi_c, lo_a, .. } = sys.extents;
    let x_lo = hi_c - f.window as i64;
    let x_hi = lo_a + f.window as i64 - 1;
    let mut u = StripField::zeros(d, x_lo, (x_hi - x_lo + 1) as usize, f.ny);
    for x in x_lo..=x_hi {
        for mu in 0..f.ny as i64 {
            for c in 0..d {
                let v = if x >= lo_a {
                    f.get((x - lo_a) as usize, mu, d + c)
                } else {
                    f.get((hi_c - 1 - x) as usize, mu, c)
                };
                u.set(x, mu, c, v);
            }
        }
    }
    u
}

/// Interior residuals `(L U)(ν)` for `ν` where every stencil reach stays in the window,
/// and boundary residuals `(B U)_k(0, μ)` stored as `[k][μ]`.
pub fn apply_folded(sys: &FoldedSystem, u: &FoldedField) -> Result<(FoldedField, Vec<Vec<f64>>)> {
    let d = sys.block;
    let reach = sys.reach().max(sys.boundary_width().saturating_sub(1));
    if u.window <= reach {
        return Err(Error::WindowTooSmall {
            needed: reach + 1,
            have: u.window,
        });
    }
    if u.block != d {
        return Err(Error::ComponentMismatch {
            expected: d,
            got: u.block,
        });
    }
    let inner = u.window - sys.reach();
    let mut out = FoldedField::zeros(d, inner, u.ny);
    for (side, off) in [(Side::Continuum, 0), (Side::Atomistic, d)] {
        let st = sys.stencil(side);
        for nu in 0..inner {
            for mu in 0..u.ny as i64 {
                for r in 0..d {
                    let mut acc = 0.0;
                    for (o, c) in st.entries() {
                        let x = nu + o[0] as usize;
                        for col in 0..d {
                            acc += c[(r, col)] * u.get(x, mu + o[1], off + col);
                        }
                    }
                    out.set(nu, mu, off + r, acc);
                }
            }
        }
    }
    let bnd = sys
        .boundary
        .iter()
        .map(|row| {
            (0..u.ny as i64)
                .map(|mu| {
                    let c: f64 = row
                        .continuum
                        .iter()
                        .map(|(&n, &w)| w * u.get(n as usize, mu, row.component))
                        .sum();
                    let a: f64 = row
                        .atomistic
                        .iter()
                        .map(|(&n, &w)| w * u.get(n as usize, mu, d + row.component))
                        .sum();
                    c + a
                })
                .collect()
        })
        .collect();
    Ok((out, bnd))
}

/// Two-region residual on a strip: continuum stencil at `x < 0`, atomistic at `x ≥ 0`.
/// Returns values for `x` where the applicable stencil stays inside the strip; NaN elsewhere.
pub fn apply_two_region(atomistic: &Stencil, continuum: &Stencil, u: &StripField) -> StripField {
    let d = u.components;
    let mut out = StripField::zeros(d, u.x_lo, u.nx, u.ny);
    for x in u.x_lo..=u.x_hi() {
        let st = if x < 0 { continuum } else { atomistic };
        let (lo, hi) = st.extent(0).unwrap_or((0, 0));
        let inside = u.contains(x + lo) && u.contains(x + hi);
        for y in 0..u.ny as i64 {
            for r in 0..d {
                let v = if inside {
                    let mut acc = 0.0;
                    for (o, c) in st.entries() {
                        for col in 0..d {
                            acc += c[(r, col)] * u.get(x + o[0], y + o[1], col);
                        }
                    }
                    acc
                } else {
                    f64::NAN
                };
                out.set(x, y, r, v);
            }
        }
    }
    out
}
