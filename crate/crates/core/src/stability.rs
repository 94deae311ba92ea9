//! Bulk ellipticity, root counting and complementing-condition checks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold::{compute_extents, fold, fold_scalar, FoldedSystem, Side};
use crate::lattice::{lambda0_sq, pairings, Grid};
use crate::models::Model;
use crate::poly::{self, LaurentMatrix, Poly};
use crate::stencil::{CMatrix, Stencil};

pub type CVector = DVector<Complex64>;

fn cz(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unresolved,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates unresolved, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Unresolved, _) | (_, Unresolved) => Unresolved,
            _ => Pass,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unresolved => "unresolved",
        }
    }
}

/// Determinant of a Laurent symbol at fixed tangential phase, as `z^shift · Σ c_n z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    pub zeta: Complex64,
    pub coeffs: Poly,
    pub shift: i64,
}

impl CharPoly {
    pub fn from_laurent(zeta: Complex64, l: &LaurentMatrix) -> Self {
        let (coeffs, shift) = l.det_poly();
        Self { zeta, coeffs, shift }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly::eval(&self.coeffs, z) * z.powi(self.shift as i32)
    }
}

/// Characteristic polynomial of a stencil in the normal variable at `ζ` (unfolded).
pub fn char_poly(stencil: &Stencil, zeta: Complex64) -> CharPoly {
    CharPoly::from_laurent(zeta, &LaurentMatrix::new(stencil.block(), stencil.laurent(&[zeta])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootClass {
    Inside,
    Outside,
    UnitAnnulus,
    AtZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
    pub class: RootClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub at_infinity: usize,
    pub degree: usize,
    pub tol_annulus: f64,
}

impl RootSet {
    fn count(&self, f: impl Fn(RootClass) -> bool) -> usize {
        self.roots
            .iter()
            .filter(|r| f(r.class))
            .map(|r| r.multiplicity)
            .sum()
    }

    /// Inside roots including those at zero.
    pub fn inside_count(&self) -> usize {
        self.count(|c| matches!(c, RootClass::Inside | RootClass::AtZero))
    }

    pub fn outside_count(&self) -> usize {
        self.count(|c| c == RootClass::Outside)
    }

    pub fn annulus_count(&self) -> usize {
        self.count(|c| c == RootClass::UnitAnnulus)
    }

    pub fn inside(&self) -> impl Iterator<Item = &Root> {
        self.roots
            .iter()
            .filter(|r| matches!(r.class, RootClass::Inside | RootClass::AtZero))
    }

    /// Total multiplicity plus roots at infinity; always equals `degree`.
    pub fn bookkeeping_total(&self) -> usize {
        self.count(|_| true) + self.at_infinity
    }
}

const DROP_TOL: f64 = 1e-13;
const CLUSTER_TOL: f64 = 1e-6;

fn classify(z: Complex64, tol: f64) -> RootClass {
    let r = z.norm();
    if r < 1.0 - tol {
        RootClass::Inside
    } else if r > 1.0 + tol {
        RootClass::Outside
    } else {
        RootClass::UnitAnnulus
    }
}

fn cluster(roots: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<(Complex64, usize, Complex64)> = Vec::new();
    for z in roots {
        match groups
            .iter_mut()
            .find(|(rep, _, _)| (*rep - z).norm() < CLUSTER_TOL)
        {
            Some(g) => {
                g.1 += 1;
                g.2 += z;
                g.0 = g.2 / g.1 as f64;
            }
            None => groups.push((z, 1, z)),
        }
    }
    groups.into_iter().map(|(z, m, _)| (z, m)).collect()
}

pub fn roots_classified(p: &CharPoly, tol_annulus: f64) -> Result<RootSet> {
    let scale = p.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale < 1e-14 {
        return Err(Error::IdenticallyZeroDeterminant);
    }
    let degree = p.coeffs.len() - 1;
    let small = |c: &Complex64| c.norm() < DROP_TOL * scale;
    let at_zero = p.coeffs.iter().take_while(|c| small(c)).count();
    let at_infinity = p.coeffs.iter().rev().take_while(|c| small(c)).count();
    let core = &p.coeffs[at_zero..p.coeffs.len() - at_infinity];
    let mut roots = Vec::new();
    let extra_zero = if p.shift > 0 { p.shift as usize } else { 0 };
    if at_zero + extra_zero > 0 {
        roots.push(Root {
            z: cz(0.0),
            multiplicity: at_zero + extra_zero,
            class: RootClass::AtZero,
        });
    }
    for (z, m) in cluster(poly::roots(core)) {
        roots.push(Root {
            z,
            multiplicity: m,
            class: classify(z, tol_annulus),
        });
    }
    roots.sort_by(|a, b| a.z.norm().partial_cmp(&b.z.norm()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(RootSet {
        roots,
        at_infinity,
        degree: degree + extra_zero,
        tol_annulus,
    })
}

// ---------------------------------------------------------------------------
// dense helpers

fn svd_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// `σ_min / σ_max` over the `min(rows, cols)` singular values.
pub fn singular_margin(m: &CMatrix) -> f64 {
    let s = svd_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Right singular vectors for the `count` smallest singular values, and the numerical nullity.
fn null_space(m: &CMatrix, count: usize, rel_tol: f64) -> (Vec<CVector>, usize) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap());
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    // rows beyond the rank of a wide matrix are missing; pad with zero singular values
    let mut sv: Vec<(f64, CVector)> = order
        .iter()
        .map(|&i| (svd.singular_values[i], vt.row(i).adjoint().into_owned()))
        .collect();
    if sv.len() < n {
        // complete the basis: project out existing vectors from unit vectors
        let mut basis: Vec<CVector> = sv.iter().map(|(_, v)| v.clone()).collect();
        for e in 0..n {
            if basis.len() == n {
                break;
            }
            let mut v = CVector::zeros(n);
            v[e] = cz(1.0);
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
            let nv = v.norm();
            if nv > 1e-8 {
                let v = v / cz(nv);
                basis.push(v.clone());
                sv.insert(0, (0.0, v));
            }
        }
    }
    let thr = rel_tol * smax.max(f64::MIN_POSITIVE);
    let nullity = sv.iter().filter(|(s, _)| *s <= thr).count();
    (sv.into_iter().take(count).map(|(_, v)| v).collect(), nullity)
}

fn pinv_solve(m: &CMatrix, rhs: &CVector) -> CVector {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(rhs, 1e-10 * smax).unwrap_or_else(|_| CVector::zeros(m.ncols()))
}

fn zpow(z: Complex64, n: i64) -> Complex64 {
    if n == 0 {
        cz(1.0)
    } else if z == cz(0.0) {
        cz(0.0)
    } else {
        z.powi(n as i32)
    }
}

/// Describes how a decaying column was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub z: Complex64,
    pub jordan: bool,
}

/// Decaying discrete solutions `z^ν v` (with Jordan partners `ν z^{ν−1} v₀ + z^ν v₁`)
/// of a one-sided block, sampled at positions `0..width`.
pub fn decaying_columns(
    l: &LaurentMatrix,
    roots: impl Iterator<Item = Root>,
    width: usize,
) -> Result<(CMatrix, Vec<ColumnMeta>)> {
    let b = l.size;
    let coeff_scale = l
        .terms
        .values()
        .map(|c| c.iter().map(|v| v.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let mut cols: Vec<CVector> = Vec::new();
    let mut meta = Vec::new();
    for r in roots {
        let z = r.z;
        let pz = l.eval(z);
        let tol = 1e-7 * coeff_scale.max(pz.iter().map(|v| v.norm()).fold(0.0, f64::max)) / pz.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max);
        let (vecs, nullity) = null_space(&pz, r.multiplicity.min(b), tol.max(1e-9));
        let m = r.multiplicity;
        let column = |f: &dyn Fn(i64) -> CVector| {
            let mut c = CVector::zeros(width * b);
            for nu in 0..width {
                c.rows_mut(nu * b, b).copy_from(&f(nu as i64));
            }
            c
        };
        if nullity >= m || m <= b && nullity == m {
            for v in vecs.into_iter().take(m) {
                cols.push(column(&|nu| &v * zpow(z, nu)));
                meta.push(ColumnMeta { z, jordan: false });
            }
        } else if m == nullity + 1 && nullity >= 1 {
            for v in vecs.iter().take(nullity) {
                cols.push(column(&|nu| v * zpow(z, nu)));
                meta.push(ColumnMeta { z, jordan: false });
            }
            let v0 = vecs[0].clone();
            let dp = l.eval_derivative(z);
            let v1 = pinv_solve(&pz, &(-(&dp * &v0)));
            cols.push(column(&|nu| &v0 * (cz(nu as f64) * zpow(z, nu - 1)) + &v1 * zpow(z, nu)));
            meta.push(ColumnMeta { z, jordan: true });
        } else {
            return Err(Error::NullSpaceMismatch {
                root: z,
                multiplicity: m,
                nullity,
            });
        }
    }
    let mut out = CMatrix::zeros(width * b, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    Ok((out, meta))
}

fn orthonormalize(y: &CMatrix) -> CMatrix {
    if y.ncols() == 0 {
        return y.clone();
    }
    let qr = y.clone().qr();
    qr.q().columns(0, y.ncols()).into_owned()
}

/// Boundary rows (ε-free) applied to per-side column blocks.
fn boundary_matrix(
    sys: &FoldedSystem,
    rows: std::ops::Range<usize>,
    yc: &CMatrix,
    ya: &CMatrix,
) -> CMatrix {
    let b = sys.block;
    let n_rows = rows.len();
    let mut out = CMatrix::zeros(n_rows, yc.ncols() + ya.ncols());
    for (r, k) in rows.enumerate() {
        let row = &sys.boundary[k];
        let (c, a) = row.normalized(sys.eps);
        let l = row.component;
        for j in 0..yc.ncols() {
            let v: Complex64 = c.iter().map(|(&n, &w)| yc[(n as usize * b + l, j)] * w).sum();
            out[(r, j)] = v;
        }
        for j in 0..ya.ncols() {
            let v: Complex64 = a.iter().map(|(&n, &w)| ya[(n as usize * b + l, j)] * w).sum();
            out[(r, yc.ncols() + j)] = v;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Assumption A

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionA {
    pub n_half: usize,
    pub min_ratio: f64,
    pub argmin_k: Vec<i64>,
    pub sign_consistent: bool,
    pub verdict: Verdict,
}

/// Minimum of `det(sign·h(ξ)) / Λ_{0,ε}^{2d}(ξ)` over the nonzero reciprocal grid.
pub fn bulk_stability_scan(stencil: &Stencil, grid: &Grid, sign: f64) -> AssumptionA {
    let eps = grid.eps();
    let d = stencil.block() as i32;
    let results: Vec<(f64, f64, usize)> = (0..grid.len())
        .into_par_iter()
        .filter_map(|lin| {
            let k = grid.wave_index(lin);
            if k.iter().all(|&v| v == 0) {
                return None;
            }
            let kf: Vec<f64> = k.iter().map(|&v| v as f64).collect();
            let h = stencil.symbol(eps, &kf) * cz(sign);
            let det = h.determinant().re;
            let lam = lambda0_sq(&pairings(&kf), eps).powi(d);
            let eig = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            let scale = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let eig_ok = if eig >= -1e-12 * scale.max(1.0) { 1.0 } else { -1.0 };
            Some((det / lam, eig_ok, lin))
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut arg = 0;
    let mut consistent = true;
    for (r, ok, lin) in results {
        max_ratio = max_ratio.max(r.abs());
        if r < min_ratio {
            min_ratio = r;
            arg = lin;
        }
        if ok < 0.0 {
            consistent = false;
        }
    }
    AssumptionA {
        n_half: grid.n_half(),
        min_ratio,
        argmin_k: grid.wave_index(arg),
        sign_consistent: consistent,
        // zeros are judged against the scan's own scale
        verdict: Verdict::from_bool(min_ratio > 1e-12 * max_ratio && consistent),
    }
}

// ---------------------------------------------------------------------------
// Assumption B

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionB {
    pub expected_q: usize,
    pub samples: usize,
    /// Inside counts `(continuum, atomistic)` per sample `θ_i = 2πi/M`, `i = 1..M−1`.
    pub counts: Vec<[usize; 2]>,
    pub mismatched_thetas: Vec<f64>,
    pub unresolved_thetas: Vec<f64>,
    pub verdict: Verdict,
}

pub fn theta_samples(m: usize) -> Vec<f64> {
    (1..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect()
}

fn side_roots(sys: &FoldedSystem, side: Side, zeta: Complex64, tol: f64) -> Result<RootSet> {
    roots_classified(&CharPoly::from_laurent(zeta, &sys.block_laurent(side, zeta)), tol)
}

pub fn assumption_b_check(sys: &FoldedSystem, m: usize, tol_annulus: f64) -> Result<AssumptionB> {
    if m < 8 {
        return Err(Error::InvalidInput(format!("need at least 8 theta samples, got {m}")));
    }
    let thetas = theta_samples(m);
    let per: Vec<Result<([usize; 2], bool)>> = thetas
        .par_iter()
        .map(|&t| {
            let zeta = Complex64::from_polar(1.0, t);
            let rc = side_roots(sys, Side::Continuum, zeta, tol_annulus)?;
            let ra = side_roots(sys, Side::Atomistic, zeta, tol_annulus)?;
            let unresolved = rc.annulus_count() + ra.annulus_count() > 0;
            Ok(([rc.inside_count(), ra.inside_count()], unresolved))
        })
        .collect();
    let mut counts = Vec::with_capacity(thetas.len());
    let mut mismatched = Vec::new();
    let mut unresolved = Vec::new();
    for (t, r) in thetas.iter().zip(per) {
        let (c, u) = r?;
        if u {
            unresolved.push(*t);
        } else if c[0] + c[1] != sys.q {
            mismatched.push(*t);
        }
        counts.push(c);
    }
    let verdict = if !mismatched.is_empty() {
        Verdict::Fail
    } else if !unresolved.is_empty() {
        Verdict::Unresolved
    } else {
        Verdict::Pass
    };
    Ok(AssumptionB {
        expected_q: sys.q,
        samples: thetas.len(),
        counts,
        mismatched_thetas: mismatched,
        unresolved_thetas: unresolved,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Mode I

/// The boundary system at one tangential phase.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    pub zeta: Complex64,
    pub matrix: CMatrix,
    pub basis_meta: Vec<(Side, ColumnMeta)>,
    pub counts: [usize; 2],
    pub unresolved: bool,
}

impl BoundaryMatrix {
    pub fn is_square(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }

    pub fn margin(&self) -> f64 {
        if self.is_square() {
            singular_margin(&self.matrix)
        } else {
            0.0
        }
    }

    pub fn abs_det(&self) -> f64 {
        if self.is_square() && self.matrix.nrows() > 0 {
            self.matrix.determinant().norm()
        } else {
            0.0
        }
    }
}

/// Boundary matrix on orthonormalized decaying solutions of both folded blocks.
pub fn mode1_matrix(sys: &FoldedSystem, zeta: Complex64, tol_annulus: f64) -> Result<BoundaryMatrix> {
    let w = sys.boundary_width();
    let mut ys = Vec::new();
    let mut meta = Vec::new();
    let mut counts = [0usize; 2];
    let mut unresolved = false;
    for (i, side) in [Side::Continuum, Side::Atomistic].into_iter().enumerate() {
        let l = sys.block_laurent(side, zeta);
        let rs = roots_classified(&CharPoly::from_laurent(zeta, &l), tol_annulus)?;
        unresolved |= rs.annulus_count() > 0;
        counts[i] = rs.inside_count();
        let (y, m) = decaying_columns(&l, rs.inside().copied(), w)?;
        ys.push(orthonormalize(&y));
        meta.extend(m.into_iter().map(|c| (side, c)));
    }
    let matrix = boundary_matrix(sys, 0..sys.q, &ys[0], &ys[1]);
    Ok(BoundaryMatrix {
        zeta,
        matrix,
        basis_meta: meta,
        counts,
        unresolved,
    })
}

/// Matrix layouts written out explicitly for the two triangular-lattice examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LiteralLayout {
    /// Scalar 3×3 system with rows `(1, z, z⁻¹)`.
    Harmonic,
    /// 6×6 system built from `(M₂₂, M₁₂)` of the normalized symbols.
    LennardJones { scale_c: f64, scale_a: f64 },
}

impl LiteralLayout {
    pub fn for_model(model: &Model, eps: f64) -> Option<Self> {
        match model {
            Model::HarmonicTriangular => Some(LiteralLayout::Harmonic),
            Model::LjTriangular(c) => Some(LiteralLayout::LennardJones {
                scale_c: eps * eps / (2.0 * (c.kappa[1] + 9.0 * c.kappa[3])),
                scale_a: eps * eps / 2.0,
            }),
            Model::PairPotentialTriangular(_) => None,
        }
    }
}

fn unfolded_inside(stencil: &Stencil, zeta: Complex64, tol: f64) -> Result<Vec<Complex64>> {
    let rs = roots_classified(&char_poly(stencil, zeta), tol)?;
    let mut out = Vec::new();
    for r in rs.inside() {
        for _ in 0..r.multiplicity {
            out.push(r.z);
        }
    }
    Ok(out)
}

/// The explicitly laid-out example matrix `A(ζ)`; `None` when a root sits at zero or the
/// root counts do not fit the layout.
pub fn literal_mode1_matrix(
    layout: LiteralLayout,
    atomistic: &Stencil,
    continuum: &Stencil,
    zeta: Complex64,
    tol: f64,
) -> Result<Option<CMatrix>> {
    match layout {
        LiteralLayout::Harmonic => {
            let (Some(a), Some(c)) = (atomistic.scalar_reduction(), continuum.scalar_reduction()) else {
                return Ok(None);
            };
            let zc = unfolded_inside(&c, zeta, tol)?;
            let za = unfolded_inside(&a, zeta, tol)?;
            if zc.len() != 1 || za.len() != 2 || zc.iter().chain(&za).any(|z| z.norm() == 0.0) {
                return Ok(None);
            }
            let mut m = CMatrix::zeros(3, 3);
            for (j, (z, s)) in [(zc[0], 1.0), (za[0], -1.0), (za[1], -1.0)].into_iter().enumerate() {
                m[(0, j)] = cz(s);
                m[(1, j)] = z * s;
                m[(2, j)] = z.inv() * s;
            }
            Ok(Some(m))
        }
        LiteralLayout::LennardJones { scale_c, scale_a } => {
            let zc = unfolded_inside(continuum, zeta, tol)?;
            let za = unfolded_inside(atomistic, zeta, tol)?;
            if zc.len() != 2 || za.len() != 4 || zc.iter().chain(&za).any(|z| z.norm() == 0.0) {
                return Ok(None);
            }
            let mut m = CMatrix::zeros(6, 6);
            let mut j = 0;
            for z in zc {
                let mz = continuum.evaluate(&[z, zeta]) * cz(scale_c);
                let (a, b) = (mz[(1, 1)], mz[(0, 1)]);
                let col = [-a, -b, -z * a, -z * b, -a / z, -b / z];
                for (i, v) in col.into_iter().enumerate() {
                    m[(i, j)] = v;
                }
                j += 1;
            }
            for z in za {
                let mz = atomistic.evaluate(&[z, zeta]) * cz(scale_a);
                let (a, b) = (mz[(1, 1)], mz[(0, 1)]);
                let col = [a, b, a / z, b / z, z * a, z * b];
                for (i, v) in col.into_iter().enumerate() {
                    m[(i, j)] = v;
                }
                j += 1;
            }
            Ok(Some(m))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub theta: f64,
    pub abs_det: f64,
    pub d_abs_det: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode1Record {
    pub samples: usize,
    pub literal_layout: bool,
    /// Minimum of the reported `|det A|` column.
    pub min_abs_det: f64,
    pub argmin_theta: f64,
    pub min_margin: f64,
    pub argmin_margin_theta: f64,
    pub det_threshold: f64,
    pub symmetry_defect: f64,
    /// Fraction of forward differences that are positive on `(0, π)`.
    pub monotone_fraction: f64,
    pub continuity_violations: usize,
    pub unresolved_thetas: Vec<f64>,
    pub count_mismatches: usize,
    pub verdict: Verdict,
    #[serde(skip)]
    pub series: Vec<ScanRow>,
}

pub struct Mode1Inputs<'a> {
    pub folded: &'a FoldedSystem,
    pub atomistic: &'a Stencil,
    pub continuum: &'a Stencil,
    pub layout: Option<LiteralLayout>,
}

pub fn mode1_scan(inp: &Mode1Inputs, m: usize, det_threshold: f64, tol_annulus: f64) -> Result<Mode1Record> {
    if m < 2 {
        return Err(Error::InvalidInput("scan needs M >= 2".into()));
    }
    let thetas = theta_samples(m);
    let samples: Vec<Result<(f64, f64, bool, bool)>> = thetas
        .par_iter()
        .map(|&t| {
            let zeta = Complex64::from_polar(1.0, t);
            let bm = mode1_matrix(inp.folded, zeta, tol_annulus)?;
            let det = match inp.layout {
                Some(layout) => literal_mode1_matrix(layout, inp.atomistic, inp.continuum, zeta, tol_annulus)?
                    .map(|a| a.determinant().norm())
                    .unwrap_or(f64::NAN),
                None => bm.abs_det(),
            };
            Ok((det, bm.margin(), bm.unresolved, bm.is_square()))
        })
        .collect();
    let mut series = Vec::with_capacity(thetas.len());
    let mut unresolved = Vec::new();
    let mut mismatches = 0;
    for (t, s) in thetas.iter().zip(samples) {
        let (det, margin, u, square) = s?;
        if u {
            unresolved.push(*t);
        }
        if !square {
            mismatches += 1;
        }
        series.push(ScanRow {
            theta: *t,
            abs_det: det,
            d_abs_det: f64::NAN,
            margin,
        });
    }
    for j in 0..series.len().saturating_sub(1) {
        series[j].d_abs_det = m as f64 * (series[j + 1].abs_det - series[j].abs_det);
    }
    let (mut min_det, mut arg_det) = (f64::INFINITY, f64::NAN);
    let (mut min_margin, mut arg_margin) = (f64::INFINITY, f64::NAN);
    for r in &series {
        if r.abs_det < min_det {
            min_det = r.abs_det;
            arg_det = r.theta;
        }
        if r.margin < min_margin {
            min_margin = r.margin;
            arg_margin = r.theta;
        }
    }
    let n = series.len();
    let peak = series
        .iter()
        .map(|r| r.abs_det)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    // relative to the scan peak; pointwise ratios are rounding noise where |det| is tiny
    let mut sym = 0.0f64;
    for i in 0..n {
        let (a, b) = (series[i].abs_det, series[n - 1 - i].abs_det);
        if a.is_finite() && b.is_finite() && peak > 0.0 {
            sym = sym.max((a - b).abs() / peak);
        }
    }
    let half: Vec<&ScanRow> = series
        .iter()
        .filter(|r| r.theta < PI && r.d_abs_det.is_finite() && r.theta + 2.0 * PI / m as f64 <= PI)
        .collect();
    let monotone_fraction = if half.is_empty() {
        f64::NAN
    } else {
        half.iter().filter(|r| r.d_abs_det > 0.0).count() as f64 / half.len() as f64
    };
    let continuity_violations = series
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0].abs_det, w[1].abs_det);
            a.is_finite() && b.is_finite() && a.min(b) > 1e-6 * peak && a.max(b) / a.min(b) >= 10.0
        })
        .count();
    let verdict = if mismatches > 0 || min_margin <= det_threshold {
        Verdict::Fail
    } else if !unresolved.is_empty() {
        Verdict::Unresolved
    } else {
        Verdict::Pass
    };
    Ok(Mode1Record {
        samples: n,
        literal_layout: inp.layout.is_some(),
        min_abs_det: min_det,
        argmin_theta: arg_det,
        min_margin,
        argmin_margin_theta: arg_margin,
        det_threshold,
        symmetry_defect: sym,
        monotone_fraction,
        continuity_violations,
        unresolved_thetas: unresolved,
        count_mismatches: mismatches,
        verdict,
        series,
    })
}

// ---------------------------------------------------------------------------
// Mode II

/// Continuum-limit quadratic forms `(Q_ss, Q_st, Q_tt)` of the two blocks (unreflected).
#[derive(Debug, Clone)]
pub struct ContinuumLimit {
    pub continuum: [DMatrix<f64>; 3],
    pub atomistic: [DMatrix<f64>; 3],
}

impl ContinuumLimit {
    pub fn from_stencils(atomistic: &Stencil, continuum: &Stencil, eps: f64) -> Self {
        Self {
            continuum: continuum.quadratic_form_2d(eps),
            atomistic: atomistic.quadratic_form_2d(eps),
        }
    }

    pub fn block(&self) -> usize {
        self.atomistic[0].nrows()
    }
}

/// `Q_ss τ² + 2 s Q_st τ θ + Q_tt θ²` as a matrix polynomial in `τ`.
fn tau_matrix(q: &[DMatrix<f64>; 3], theta: f64, reflect: bool) -> LaurentMatrix {
    let s = if reflect { -1.0 } else { 1.0 };
    let to_c = |m: &DMatrix<f64>, f: f64| m.map(|v| cz(v * f));
    let mut terms = std::collections::BTreeMap::new();
    terms.insert(0, to_c(&q[2], theta * theta));
    terms.insert(1, to_c(&q[1], 2.0 * s * theta));
    terms.insert(2, to_c(&q[0], 1.0));
    LaurentMatrix::new(q[0].nrows(), terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode2Sample {
    pub theta: f64,
    pub roots_continuum: Vec<Complex64>,
    pub roots_atomistic: Vec<Complex64>,
    pub jordan_columns: usize,
    pub margin: f64,
    pub supplementary_violation: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode2Record {
    pub samples: Vec<Mode2Sample>,
    pub verdict: Verdict,
}

/// Columns, upper roots, Jordan column count, and whether a root sat on the real axis.
type ContinuumColumns = (Vec<(CVector, CVector)>, Vec<Complex64>, usize, bool);

/// Decaying continuum solutions `e^{iτx}v` (Jordan: `e^{iτx}(ixv₀ + v₁)`), returned as
/// `(value at 0, derivative at 0)` pairs.
fn continuum_columns(l: &LaurentMatrix, theta: f64) -> Result<ContinuumColumns> {
    let (p, _) = l.det_poly();
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = p.iter().rposition(|c| c.norm() > 1e-13 * scale).unwrap_or(0);
    let raw = poly::roots(&p[..=lead]);
    let mut on_axis = false;
    let upper: Vec<Complex64> = raw
        .into_iter()
        .filter(|t| {
            if t.im.abs() <= 1e-10 * theta.abs().max(1.0) {
                on_axis = true;
            }
            t.im > 1e-10 * theta.abs().max(1.0)
        })
        .collect();
    let mut cols = Vec::new();
    let mut jordan = 0;
    let i = Complex64::new(0.0, 1.0);
    let coeff_scale = l.terms.values().map(|c| c.iter().map(|v| v.norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
    for (tau, m) in cluster(upper.clone()) {
        let pt = l.eval(tau);
        let (vecs, nullity) = null_space(&pt, m.min(l.size), 1e-7 * coeff_scale.max(1e-300) / pt.iter().map(|v| v.norm()).fold(f64::MIN_POSITIVE, f64::max));
        if nullity >= m {
            for v in vecs.into_iter().take(m) {
                let dv = &v * (i * tau);
                cols.push((v, dv));
            }
        } else if m == nullity + 1 && nullity >= 1 {
            for v in vecs.iter().take(nullity) {
                cols.push((v.clone(), v * (i * tau)));
            }
            let v0 = vecs[0].clone();
            let v1 = pinv_solve(&pt, &(-(l.eval_derivative(tau) * &v0)));
            let d = &v1 * (i * tau) + &v0 * i;
            cols.push((v1, d));
            jordan += 1;
        } else {
            return Err(Error::NullSpaceMismatch {
                root: tau,
                multiplicity: m,
                nullity,
            });
        }
    }
    Ok((cols, upper, jordan, on_axis))
}

pub fn mode2_check(limit: &ContinuumLimit, theta: f64) -> Result<Mode2Sample> {
    let b = limit.block();
    let lc = tau_matrix(&limit.continuum, theta, true);
    let la = tau_matrix(&limit.atomistic, theta, false);
    let (cc, rc, jc, axis_c) = continuum_columns(&lc, theta)?;
    let (ca, ra, ja, axis_a) = continuum_columns(&la, theta)?;
    let violation = rc.len() != b || ra.len() != b;
    let p = 2 * b;
    let mut m = CMatrix::zeros(p, cc.len() + ca.len());
    for order in 0..2usize {
        for l in 0..b {
            let r = order * b + l;
            for (j, (v, dv)) in cc.iter().enumerate() {
                m[(r, j)] = if order == 0 { v[l] } else { dv[l] };
            }
            // −(−∂)^i on the atomistic side
            let s = if order == 0 { -1.0 } else { 1.0 };
            for (j, (v, dv)) in ca.iter().enumerate() {
                m[(r, cc.len() + j)] = cz(s) * if order == 0 { v[l] } else { dv[l] };
            }
        }
    }
    let margin = if m.nrows() == m.ncols() { singular_margin(&m) } else { 0.0 };
    let verdict = if axis_c || axis_a {
        Verdict::Unresolved
    } else {
        Verdict::from_bool(!violation && margin > 1e-8)
    };
    Ok(Mode2Sample {
        theta,
        roots_continuum: rc,
        roots_atomistic: ra,
        jordan_columns: jc + ja,
        margin,
        supplementary_violation: violation,
        verdict,
    })
}

pub fn mode2_record(limit: &ContinuumLimit) -> Result<Mode2Record> {
    let samples = vec![mode2_check(limit, 1.0)?, mode2_check(limit, -1.0)?];
    let verdict = samples.iter().fold(Verdict::Pass, |v, s| v.combine(s.verdict));
    Ok(Mode2Record { samples, verdict })
}

// ---------------------------------------------------------------------------
// Mode III

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedRoot {
    pub side: String,
    pub z: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralMode3 {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub kernel_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode3Record {
    pub retained: Vec<RetainedRoot>,
    pub deflated_unit_roots: [usize; 2],
    pub rows: usize,
    pub cols: usize,
    pub kernel_dim: usize,
    pub margin: f64,
    pub dimension_mismatch: bool,
    pub literal: Option<LiteralMode3>,
    pub verdict: Verdict,
}

/// Removes `(z − 1)` factors that vanish to rounding.
fn deflate_unit(p: &[Complex64]) -> (Poly, usize) {
    let mut cur = p.to_vec();
    let mut count = 0;
    loop {
        if cur.len() < 2 {
            break;
        }
        let scale = cur.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let (q, rem) = poly::deflate(&cur, cz(1.0));
        if rem.norm() <= 1e-9 * scale {
            cur = q;
            count += 1;
        } else {
            break;
        }
    }
    (cur, count)
}

fn retained_roots(l: &LaurentMatrix, tol: f64) -> Result<(Vec<Root>, usize)> {
    let (p, _) = l.det_poly();
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale < 1e-14 {
        return Err(Error::IdenticallyZeroDeterminant);
    }
    let at_zero = p.iter().take_while(|c| c.norm() < DROP_TOL * scale).count();
    let hi = p.iter().rposition(|c| c.norm() >= DROP_TOL * scale).unwrap_or(0);
    let (core, unit) = deflate_unit(&p[at_zero..=hi]);
    let mut out = Vec::new();
    if at_zero > 0 {
        out.push(Root {
            z: cz(0.0),
            multiplicity: at_zero,
            class: RootClass::AtZero,
        });
    }
    for (z, m) in cluster(poly::roots(&core)) {
        if z.norm() < 1.0 - tol {
            out.push(Root {
                z,
                multiplicity: m,
                class: RootClass::Inside,
            });
        }
    }
    Ok((out, unit))
}

pub fn mode3_check(sys: &FoldedSystem, layout: Option<(LiteralLayout, &Stencil, &Stencil)>) -> Result<Mode3Record> {
    let one = cz(1.0);
    let tol = 1e-6;
    let w = sys.boundary_width();
    let mut retained = Vec::new();
    let mut ys = Vec::new();
    let mut unit = [0usize; 2];
    for (i, side) in [Side::Continuum, Side::Atomistic].into_iter().enumerate() {
        let l = sys.block_laurent(side, one);
        let (roots, u) = retained_roots(&l, tol)?;
        unit[i] = u;
        for r in &roots {
            retained.push(RetainedRoot {
                side: if i == 0 { "continuum" } else { "atomistic" }.into(),
                z: r.z,
                multiplicity: r.multiplicity,
            });
        }
        let (y, _) = decaying_columns(&l, roots.into_iter(), w)?;
        ys.push(orthonormalize(&y));
    }
    let (_, b2) = sys.partition();
    let m = boundary_matrix(sys, b2, &ys[0], &ys[1]);
    let (rows, cols) = (m.nrows(), m.ncols());
    let s = svd_values(&m);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| v > 1e-8 * smax && v > 0.0).count();
    let kernel_dim = cols - rank;
    let margin = if cols == 0 {
        1.0
    } else if rows < cols {
        0.0
    } else {
        s.last().copied().unwrap_or(0.0) / smax.max(f64::MIN_POSITIVE)
    };
    let literal = match layout {
        Some((lay, a, c)) => Some(literal_mode3(lay, a, c, tol)?),
        None => None,
    };
    Ok(Mode3Record {
        retained,
        deflated_unit_roots: unit,
        rows,
        cols,
        kernel_dim,
        margin,
        dimension_mismatch: rows != cols,
        literal,
        verdict: Verdict::from_bool(kernel_dim == 0),
    })
}

/// Example-literal mode III systems: scalar `c z⁻¹ = c z`, and rows
/// `(z⁻¹M₂₂, z⁻¹M₁₂, zM₂₂, zM₁₂)` for the 2×2 case.
pub fn literal_mode3(layout: LiteralLayout, atomistic: &Stencil, continuum: &Stencil, tol: f64) -> Result<LiteralMode3> {
    let one = cz(1.0);
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    match layout {
        LiteralLayout::Harmonic => {
            let a = atomistic
                .scalar_reduction()
                .ok_or_else(|| Error::InvalidInput("harmonic layout needs scalar stencils".into()))?;
            let c = continuum
                .scalar_reduction()
                .ok_or_else(|| Error::InvalidInput("harmonic layout needs scalar stencils".into()))?;
            for st in [&c, &a] {
                let l = LaurentMatrix::new(1, st.laurent(&[one]));
                for r in retained_roots(&l, tol)?.0 {
                    if r.z.norm() > 0.0 {
                        cols.push(vec![r.z.inv() - r.z]);
                    }
                }
            }
        }
        LiteralLayout::LennardJones { scale_c, scale_a } => {
            for (st, sc) in [(continuum, scale_c), (atomistic, scale_a)] {
                let l = LaurentMatrix::new(2, st.laurent(&[one]));
                for r in retained_roots(&l, tol)?.0 {
                    if r.z.norm() == 0.0 {
                        continue;
                    }
                    let mz = st.evaluate(&[r.z, one]) * cz(sc);
                    let (a, b) = (mz[(1, 1)], mz[(0, 1)]);
                    let zi = r.z.inv();
                    cols.push(vec![zi * a, zi * b, r.z * a, r.z * b]);
                }
            }
        }
    }
    let rows = match layout {
        LiteralLayout::Harmonic => 1,
        LiteralLayout::LennardJones { .. } => 4,
    };
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let s = svd_values(&m);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| v > 1e-8 * smax && v > 0.0).count();
    Ok(LiteralMode3 {
        rows,
        cols: cols.len(),
        rank,
        kernel_dim: cols.len() - rank,
    })
}

// ---------------------------------------------------------------------------
// Supplementary condition

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplementaryRecord {
    pub samples: usize,
    pub skipped_parallel: usize,
    pub uneven_splits: usize,
    pub unresolved: usize,
    pub verdict: Verdict,
}

/// Checks that `det l(ζ + τζ′)` has equally many roots above and below the real axis.
pub fn supplementary_check_pairs(q: &[DMatrix<f64>; 3], pairs: &[([f64; 2], [f64; 2])]) -> SupplementaryRecord {
    let b = q[0].nrows();
    let mut skipped = 0;
    let mut uneven = 0;
    let mut unresolved = 0;
    let mut used = 0;
    for (z, zp) in pairs {
        let cross = z[0] * zp[1] - z[1] * zp[0];
        let nz = (z[0] * z[0] + z[1] * z[1]).sqrt();
        let nzp = (zp[0] * zp[0] + zp[1] * zp[1]).sqrt();
        if cross.abs() < 1e-8 * nz * nzp {
            skipped += 1;
            continue;
        }
        used += 1;
        // η = ζ + τζ′; l(η) = Q_ss η₀² + 2Q_st η₀η₁ + Q_tt η₁²
        let c2 = &q[0] * (zp[0] * zp[0]) + &q[1] * (2.0 * zp[0] * zp[1]) + &q[2] * (zp[1] * zp[1]);
        let c1 = &q[0] * (2.0 * z[0] * zp[0])
            + &q[1] * (2.0 * (z[0] * zp[1] + z[1] * zp[0]))
            + &q[2] * (2.0 * z[1] * zp[1]);
        let c0 = &q[0] * (z[0] * z[0]) + &q[1] * (2.0 * z[0] * z[1]) + &q[2] * (z[1] * z[1]);
        let mut terms = std::collections::BTreeMap::new();
        for (n, c) in [(0, c0), (1, c1), (2, c2)] {
            terms.insert(n, c.map(cz));
        }
        let (p, _) = LaurentMatrix::new(b, terms).det_poly();
        let r = poly::roots(&p);
        let scale = r.iter().map(|t| t.norm()).fold(1.0, f64::max);
        if r.iter().any(|t| t.im.abs() <= 1e-10 * scale) {
            unresolved += 1;
            continue;
        }
        let up = r.iter().filter(|t| t.im > 0.0).count();
        if up != b || r.len() != 2 * b {
            uneven += 1;
        }
    }
    let verdict = if uneven > 0 {
        Verdict::Fail
    } else if unresolved > 0 || used == 0 {
        Verdict::Unresolved
    } else {
        Verdict::Pass
    };
    SupplementaryRecord {
        samples: used,
        skipped_parallel: skipped,
        uneven_splits: uneven,
        unresolved,
        verdict,
    }
}

/// Deterministic quasi-random direction pairs.
pub fn sample_pairs(n: usize) -> Vec<([f64; 2], [f64; 2])> {
    let golden = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * ((i as f64 * golden).fract());
            let b = a + 0.3 + 2.5 * (((i as f64 + 0.5) * golden * golden).fract());
            let r1 = 0.5 + ((i as f64 * 0.754_877_666).fract());
            let r2 = 0.5 + ((i as f64 * 0.569_840_29).fract());
            ([r1 * a.cos(), r1 * a.sin()], [r2 * b.cos(), r2 * b.sin()])
        })
        .collect()
}

pub fn supplementary_check(q: &[DMatrix<f64>; 3], samples: usize) -> SupplementaryRecord {
    supplementary_check_pairs(q, &sample_pairs(samples))
}

// ---------------------------------------------------------------------------
// Aggregate report

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub scan_m: usize,
    pub tol_annulus: f64,
    pub det_threshold: f64,
    pub supplementary_samples: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            scan_m: 1000,
            tol_annulus: 1e-8,
            det_threshold: 1e-6,
            supplementary_samples: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityBound {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub model: String,
    pub n_half: usize,
    pub eps: f64,
    pub scalar_reduced: bool,
    pub q: usize,
    pub p: usize,
    pub assumption_a: AssumptionA,
    pub assumption_b: AssumptionB,
    pub mode1: Mode1Record,
    pub mode2: Mode2Record,
    pub mode3: Mode3Record,
    pub supplementary: SupplementaryRecord,
    pub elasticity_bound: Option<ElasticityBound>,
    pub overall: Verdict,
}

/// A pair of linearized stencils to analyse, with optional example layout.
pub struct StencilPair {
    pub name: String,
    pub atomistic: Stencil,
    pub continuum: Stencil,
    pub layout: Option<LiteralLayout>,
}

/// Folds a stencil pair, preferring the scalar reduction when it applies.
pub fn fold_pair(atomistic: &Stencil, continuum: &Stencil, eps: f64) -> Result<(FoldedSystem, bool)> {
    match fold_scalar(atomistic, continuum, eps) {
        Some(r) => Ok((r?, true)),
        None => {
            let e = compute_extents(atomistic, continuum)?;
            Ok((fold(atomistic, continuum, e, eps)?, false))
        }
    }
}

pub fn stability_report_for(pair: &StencilPair, grid: &Grid, opts: &StabilityOptions) -> Result<StabilityReport> {
    let eps = grid.eps();
    let (sys, scalar) = fold_pair(&pair.atomistic, &pair.continuum, eps)?;
    let (a_st, c_st) = if scalar {
        (
            pair.atomistic.scalar_reduction().expect("scalar"),
            pair.continuum.scalar_reduction().expect("scalar"),
        )
    } else {
        (pair.atomistic.clone(), pair.continuum.clone())
    };
    let assumption_a = bulk_stability_scan(&pair.atomistic, grid, -1.0);
    let assumption_b = assumption_b_check(&sys, opts.scan_m.max(8), opts.tol_annulus)?;
    let mode1 = mode1_scan(
        &Mode1Inputs {
            folded: &sys,
            atomistic: &pair.atomistic,
            continuum: &pair.continuum,
            layout: pair.layout,
        },
        opts.scan_m,
        opts.det_threshold,
        opts.tol_annulus,
    )?;
    let limit = ContinuumLimit::from_stencils(&a_st, &c_st, eps);
    let mode2 = mode2_record(&limit)?;
    let mode3 = mode3_check(&sys, pair.layout.map(|l| (l, &pair.atomistic, &pair.continuum)))?;
    let supplementary = supplementary_check(&limit.continuum, opts.supplementary_samples);
    let overall = [
        assumption_a.verdict,
        assumption_b.verdict,
        mode1.verdict,
        mode2.verdict,
        mode3.verdict,
        supplementary.verdict,
    ]
    .into_iter()
    .fold(Verdict::Pass, Verdict::combine);
    Ok(StabilityReport {
        model: pair.name.clone(),
        n_half: grid.n_half(),
        eps,
        scalar_reduced: scalar,
        q: sys.q,
        p: sys.p,
        assumption_a,
        assumption_b,
        mode1,
        mode2,
        mode3,
        supplementary,
        elasticity_bound: None,
        overall,
    })
}

pub fn full_stability_report(model: &Model, grid: &Grid, opts: &StabilityOptions) -> Result<StabilityReport> {
    let eps = grid.eps();
    let pair = StencilPair {
        name: model.name().to_string(),
        atomistic: model.atomistic_stencil(eps),
        continuum: model.continuum_stencil(eps),
        layout: LiteralLayout::for_model(model, eps),
    };
    let mut report = stability_report_for(&pair, grid, opts)?;
    if let Some(c) = model.lj_constants() {
        let lhs = c.kappa[1] + 9.0 * c.kappa[3];
        let rhs = 60.0 * c.k;
        report.elasticity_bound = Some(ElasticityBound {
            lhs,
            rhs,
            margin: lhs - rhs,
            holds: lhs >= rhs,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn harmonic_scalar(eps: f64) -> (Stencil, Stencil) {
        let m = Model::HarmonicTriangular;
        (
            m.atomistic_stencil(eps).scalar_reduction().unwrap(),
            m.continuum_stencil(eps).scalar_reduction().unwrap(),
        )
    }

    #[test]
    fn degree_drop_at_zeta_minus_one() {
        let (_, c) = harmonic_scalar(0.5);
        let p = char_poly(&c, cz(-1.0));
        let rs = roots_classified(&p, 1e-8).unwrap();
        assert_eq!(rs.at_infinity, 1);
        assert_eq!(rs.inside_count(), 1);
        assert_eq!(rs.bookkeeping_total(), rs.degree);
    }

    #[test]
    fn zeta_one_double_root_flagged() {
        let (_, c) = harmonic_scalar(0.5);
        let rs = roots_classified(&char_poly(&c, cz(1.0)), 1e-8).unwrap();
        assert_eq!(rs.annulus_count(), 2);
    }

    #[test]
    fn zero_polynomial_errors() {
        let p = CharPoly {
            zeta: cz(1.0),
            coeffs: vec![cz(0.0); 3],
            shift: 0,
        };
        assert_eq!(roots_classified(&p, 1e-8), Err(Error::IdenticallyZeroDeterminant));
    }

    #[test]
    fn bulk_scan_detects_zero_symbol() {
        let g = Grid::new(Lattice::triangular(), 4).unwrap();
        let bonds: Vec<(Vec<i64>, f64, f64)> = [[2, 0], [-2, 0], [0, 2], [0, -2]]
            .iter()
            .map(|m| (m.to_vec(), 1.0, 0.0))
            .collect();
        let s = Stencil::from_bonds(&Lattice::triangular(), &bonds, 1.0);
        let a = bulk_stability_scan(&s, &g, -1.0);
        assert_eq!(a.verdict, Verdict::Fail);
        let h = bulk_stability_scan(&Model::HarmonicTriangular.atomistic_stencil(g.eps()), &g, -1.0);
        assert_eq!(h.verdict, Verdict::Pass);
    }

    #[test]
    fn harmonic_counts_and_modes() {
        let eps = 1.0 / 16.0;
        let (a, c) = harmonic_scalar(eps);
        let (sys, scalar) = fold_pair(&a, &c, eps).unwrap();
        assert!(scalar);
        let b = assumption_b_check(&sys, 64, 1e-8).unwrap();
        assert_eq!(b.verdict, Verdict::Pass);
        assert!(b.counts.iter().all(|c| *c == [1, 2]));
        let m3 = mode3_check(&sys, Some((LiteralLayout::Harmonic, &a, &c))).unwrap();
        assert_eq!(m3.verdict, Verdict::Pass);
        assert_eq!(m3.retained.len(), 1);
        assert!((m3.retained[0].z.re - (2.0 * 2f64.sqrt() - 3.0)).abs() < 1e-12);
        let limit = ContinuumLimit::from_stencils(&a, &c, eps);
        let m2 = mode2_record(&limit).unwrap();
        assert_eq!(m2.verdict, Verdict::Pass);
        assert!((m2.samples[0].roots_atomistic[0] - Complex64::new(0.0, 1.0)).norm() > 0.0);
    }

    #[test]
    fn supplementary_skips_parallel() {
        let q = [DMatrix::identity(1, 1), DMatrix::zeros(1, 1), DMatrix::identity(1, 1)];
        let r = supplementary_check_pairs(&q, &[([1.0, 0.0], [2.0, 0.0]), ([1.0, 0.0], [0.0, 1.0])]);
        assert_eq!(r.skipped_parallel, 1);
        assert_eq!(r.verdict, Verdict::Pass);
    }
}
