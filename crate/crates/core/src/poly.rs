//! Complex polynomials, polynomial matrices and companion-matrix root finding.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::stencil::CMatrix;

/// Ascending coefficients `c₀ + c₁z + …`.
pub type Poly = Vec<Complex64>;

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(c0(), |acc, &c| acc * z + c)
}

pub fn derivative(p: &[Complex64]) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![c0(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Poly {
    let mut out = vec![c0(); a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

pub fn scale(a: &[Complex64], s: Complex64) -> Poly {
    a.iter().map(|&x| x * s).collect()
}

/// Synthetic division by `(z − r)`; returns quotient and remainder.
pub fn deflate(p: &[Complex64], r: Complex64) -> (Poly, Complex64) {
    if p.is_empty() {
        return (Vec::new(), c0());
    }
    let n = p.len() - 1;
    let mut q = vec![c0(); n];
    let mut acc = p[n];
    for i in (0..n).rev() {
        q[i] = acc;
        acc = p[i] + acc * r;
    }
    (q, acc)
}

/// Determinant of a square matrix of polynomials by cofactor expansion.
pub fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    match n {
        0 => vec![Complex64::new(1.0, 0.0)],
        1 => m[0][0].clone(),
        _ => {
            let mut out = Vec::new();
            for col in 0..n {
                if m[0][col].iter().all(|c| *c == c0()) {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = mul(&m[0][col], &det(&minor));
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                out = add(&out, &scale(&term, Complex64::new(sign, 0.0)));
            }
            out
        }
    }
}

/// Matrix-valued Laurent polynomial `Σ_n C_n z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix {
    pub terms: BTreeMap<i64, CMatrix>,
    pub size: usize,
}

impl LaurentMatrix {
    pub fn new(size: usize, terms: BTreeMap<i64, CMatrix>) -> Self {
        Self { terms, size }
    }

    pub fn lo(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(0)
    }

    pub fn hi(&self) -> i64 {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> CMatrix {
        let mut out = CMatrix::zeros(self.size, self.size);
        for (&n, c) in &self.terms {
            out += c * z.powi(n as i32);
        }
        out
    }

    pub fn eval_derivative(&self, z: Complex64) -> CMatrix {
        let mut out = CMatrix::zeros(self.size, self.size);
        for (&n, c) in &self.terms {
            if n != 0 {
                out += c * (z.powi(n as i32 - 1) * n as f64);
            }
        }
        out
    }

    /// `det` as an ordinary polynomial in `z` times `z^shift`.
    pub fn det_poly(&self) -> (Poly, i64) {
        let lo = self.lo();
        let width = (self.hi() - lo + 1) as usize;
        let entries: Vec<Vec<Poly>> = (0..self.size)
            .map(|i| {
                (0..self.size)
                    .map(|j| {
                        let mut p = vec![c0(); width];
                        for (&n, c) in &self.terms {
                            p[(n - lo) as usize] = c[(i, j)];
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        (det(&entries), lo * self.size as i64)
    }
}

fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of `p` (ascending, nonzero leading coefficient, degree ≥ 1) via the balanced
/// companion matrix, refined by a few guarded Newton steps.
pub fn roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    if n == 1 {
        return vec![-p[0] / lead];
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    balance(&mut m);
    let eig = nalgebra::linalg::Schur::new(m)
        .eigenvalues()
        .map(|v| v.iter().copied().collect::<Vec<_>>())
        .unwrap_or_default();
    let dp = derivative(p);
    eig.into_iter().map(|z| polish(p, &dp, z)).collect()
}

fn polish(p: &[Complex64], dp: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut fz = eval(p, z).norm();
    for _ in 0..8 {
        let d = eval(dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = eval(p, z) / d;
        let cand = z - step;
        let fc = eval(p, cand).norm();
        if fc < fz {
            z = cand;
            fz = fc;
        } else {
            break;
        }
        if step.norm() <= 1e-16 * z.norm().max(1e-300) {
            break;
        }
    }
    z
}
