//! Harmonic polynomial dimensions, the cone degree/eigenvalue relation, the
//! flat Bochner identity and sublevel-volume fractions of eigenfunctions.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{fit_slope, fd_weights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("ambient dimension must be at least 1")]
    BadDimension,
    #[error("brute force limited to n ≤ {max_n}, d ≤ {max_d}")]
    BruteForceTooLarge { max_n: usize, max_d: usize },
    #[error("closed form {closed} disagrees with brute-force rank {brute} at n = {n}, d = {d}")]
    Mismatch { n: usize, d: usize, closed: u64, brute: u64 },
    #[error("cone dimension must be at least 2")]
    BadConeDimension,
    #[error("negative eigenvalue {0}")]
    NegativeEigenvalue(f64),
    #[error("negative degree {0}")]
    NegativeDegree(f64),
    #[error("field is identically zero")]
    ZeroField,
    #[error("bad grid: {0}")]
    BadGrid(String),
}

pub const BRUTE_MAX_N: usize = 4;
pub const BRUTE_MAX_D: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicDim {
    pub n: usize,
    pub d: usize,
    pub value: u64,
    /// Whether the closed form was confirmed by the monomial Laplacian rank.
    pub cross_checked: bool,
}

fn binomial(top: i64, k: i64) -> u64 {
    if k < 0 || top < k || top < 0 {
        return 0;
    }
    let k = k.min(top - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (top - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Homogeneous harmonic polynomials of degree `k` in `n` variables:
/// `C(n+k−1, n−1) − C(n+k−3, n−1)`.
pub fn homogeneous_harmonic_count(n: usize, k: usize) -> u64 {
    let (n, k) = (n as i64, k as i64);
    binomial(n + k - 1, n - 1) - binomial(n + k - 3, n - 1)
}

/// Harmonic polynomials of degree at most `d` on `Rⁿ`, closed form.
pub fn dim_closed_form(n: usize, d: usize) -> Result<u64, SpectraError> {
    if n == 0 {
        return Err(SpectraError::BadDimension);
    }
    Ok((0..=d).map(|k| homogeneous_harmonic_count(n, k)).sum())
}

fn monomials(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=k).rev() {
            prefix.push(a);
            rec(n, k - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Integer matrix of `Δ` from degree-`k` monomials to degree-`(k−2)` monomials.
fn laplacian_block(n: usize, k: usize) -> (usize, usize, Vec<Vec<i64>>) {
    let cols = monomials(n, k);
    if k < 2 {
        return (0, cols.len(), Vec::new());
    }
    let rows = monomials(n, k - 2);
    let index: std::collections::HashMap<&Vec<usize>, usize> =
        rows.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mat = vec![vec![0i64; cols.len()]; rows.len()];
    for (c, alpha) in cols.iter().enumerate() {
        for i in 0..n {
            if alpha[i] >= 2 {
                let mut beta = alpha.clone();
                beta[i] -= 2;
                mat[index[&beta]][c] += (alpha[i] * (alpha[i] - 1)) as i64;
            }
        }
    }
    (rows.len(), cols.len(), mat)
}

const P61: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P61 as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn rank_mod_p(mat: &[Vec<i64>], ncols: usize) -> usize {
    let mut m: Vec<Vec<u64>> = mat
        .iter()
        .map(|r| r.iter().map(|&v| v.rem_euclid(P61 as i64) as u64).collect())
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = powmod(m[rank][col], P61 - 2);
        let pivot_row: Vec<u64> = m[rank].iter().map(|&v| mulmod(v, inv)).collect();
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (x, &p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = (*x + P61 - mulmod(f, p)) % P61;
            }
        }
        m[rank] = pivot_row;
        rank += 1;
    }
    rank
}

fn rank_rational(mat: &[Vec<i64>], ncols: usize) -> usize {
    let mut m: Vec<Vec<BigRational>> = mat
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = BigRational::one() / m[rank][col].clone();
        let pivot_row: Vec<BigRational> = m[rank].iter().map(|v| v * &inv).collect();
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &f * p;
            }
        }
        m[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Exact rank of an integer matrix. Full row rank mod `2⁶¹ − 1` certifies the
/// rational rank; anything else is redone over the rationals.
pub fn exact_rank(mat: &[Vec<i64>], ncols: usize) -> usize {
    let r = rank_mod_p(mat, ncols);
    if r == mat.len() {
        r
    } else {
        rank_rational(mat, ncols)
    }
}

/// `dim ker Δ` on polynomials of degree `≤ d`, one homogeneous block at a time.
pub fn dim_brute_force(n: usize, d: usize) -> Result<u64, SpectraError> {
    if n == 0 {
        return Err(SpectraError::BadDimension);
    }
    if n > BRUTE_MAX_N || d > BRUTE_MAX_D {
        return Err(SpectraError::BruteForceTooLarge {
            max_n: BRUTE_MAX_N,
            max_d: BRUTE_MAX_D,
        });
    }
    let mut dim = 0u64;
    for k in 0..=d {
        let (_, ncols, mat) = laplacian_block(n, k);
        dim += (ncols - exact_rank(&mat, ncols)) as u64;
    }
    Ok(dim)
}

pub fn dim_harmonic_poly(n: usize, d: usize) -> Result<HarmonicDim, SpectraError> {
    let closed = dim_closed_form(n, d)?;
    match dim_brute_force(n, d) {
        Ok(brute) if brute == closed => Ok(HarmonicDim {
            n,
            d,
            value: closed,
            cross_checked: true,
        }),
        Ok(brute) => Err(SpectraError::Mismatch { n, d, closed, brute }),
        Err(SpectraError::BruteForceTooLarge { .. }) => Ok(HarmonicDim {
            n,
            d,
            value: closed,
            cross_checked: false,
        }),
        Err(e) => Err(e),
    }
}

/// Log-log slope of `d ↦ dim` over `d ∈ [d_max/2, d_max]`. For `n = 1` the
/// dimension is 2 for every `d ≥ 1` and the slope is 0.
pub fn growth_exponent_fit(n: usize, d_max: usize) -> Result<f64, SpectraError> {
    if d_max < 8 {
        return Err(SpectraError::BadGrid(format!("need d_max ≥ 8, got {d_max}")));
    }
    let ds: Vec<usize> = (d_max / 2..=d_max).collect();
    let xs: Vec<f64> = ds.iter().map(|&d| (d as f64).ln()).collect();
    let ys = ds
        .iter()
        .map(|&d| dim_closed_form(n, d).map(|v| (v as f64).ln()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_slope(&xs, &ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeDegree {
    pub k: usize,
    pub p: f64,
    pub lambda: f64,
}

/// `λ = p² + (k−2) p`
pub fn cone_eigenvalue(k: usize, p: f64) -> Result<ConeDegree, SpectraError> {
    if k < 2 {
        return Err(SpectraError::BadConeDimension);
    }
    if !(p >= 0.0) {
        return Err(SpectraError::NegativeDegree(p));
    }
    Ok(ConeDegree {
        k,
        p,
        lambda: p * (p + (k as f64 - 2.0)),
    })
}

/// Nonnegative root of `p² + (k−2) p = λ`.
pub fn cone_degree(k: usize, lambda: f64) -> Result<ConeDegree, SpectraError> {
    if k < 2 {
        return Err(SpectraError::BadConeDimension);
    }
    if !(lambda >= 0.0) {
        return Err(SpectraError::NegativeEigenvalue(lambda));
    }
    let a = k as f64 - 2.0;
    let disc = (a * a + 4.0 * lambda).sqrt();
    let p = if lambda == 0.0 { 0.0 } else { 2.0 * lambda / (a + disc) };
    Ok(ConeDegree { k, p, lambda })
}

/// First nonzero eigenvalue of the round `Sⁿ`, from the degree-one harmonics
/// on the cone `R^{n+1}`.
pub fn lichnerowicz_value(n: usize) -> Result<f64, SpectraError> {
    if n == 0 {
        return Err(SpectraError::BadDimension);
    }
    Ok(cone_eigenvalue(n + 1, 1.0)?.lambda)
}

/// Samples on a uniform Cartesian grid in two or three dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatField {
    pub shape: Vec<usize>,
    pub h: Vec<f64>,
    pub origin: Vec<f64>,
    /// Row-major, last axis fastest.
    pub values: Vec<f64>,
}

impl FlatField {
    pub fn from_fn<F: Fn(&[f64]) -> f64 + Sync>(
        origin: &[f64],
        h: &[f64],
        shape: &[usize],
        f: F,
    ) -> Result<Self, SpectraError> {
        let dim = shape.len();
        if !(2..=3).contains(&dim) || h.len() != dim || origin.len() != dim {
            return Err(SpectraError::BadGrid("need a 2-D or 3-D grid".into()));
        }
        if shape.iter().any(|&n| n < 9) || h.iter().any(|&v| !(v > 0.0)) {
            return Err(SpectraError::BadGrid(
                "need at least 9 nodes per axis and positive spacing".into(),
            ));
        }
        let total: usize = shape.iter().product();
        let field = FlatField {
            shape: shape.to_vec(),
            h: h.to_vec(),
            origin: origin.to_vec(),
            values: Vec::new(),
        };
        let values = (0..total)
            .into_par_iter()
            .map(|k| f(&field.point(&field.unravel(k))))
            .collect();
        Ok(FlatField { values, ..field })
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.shape.len()];
        for a in (0..self.shape.len() - 1).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn unravel(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = k % self.shape[a];
            k /= self.shape[a];
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.origin)
            .zip(&self.h)
            .map(|((&i, o), h)| o + i as f64 * h)
            .collect()
    }
}

const CENTERED5: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Five-point centered derivative of order `m` along axis `a`, at nodes at
/// least two away from that axis' ends (NaN elsewhere).
fn derivative(field: &FlatField, data: &[f64], a: usize, m: usize) -> Vec<f64> {
    let w = fd_weights(0.0, &CENTERED5, m);
    let stride = field.strides()[a];
    let scale = field.h[a].powi(m as i32);
    (0..data.len())
        .map(|k| {
            let i = field.unravel(k)[a];
            if i < 2 || i + 2 >= field.shape[a] {
                return f64::NAN;
            }
            let mut acc = 0.0;
            for (q, wq) in w.iter().enumerate() {
                acc += wq * data[k + q * stride - 2 * stride];
            }
            acc / scale
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BochnerTerms {
    /// `½ Δ|∇u|²`
    pub half_lap_grad_sq: Vec<f64>,
    /// `|Hess u|²`
    pub hess_sq: Vec<f64>,
    /// `⟨∇Δu, ∇u⟩`
    pub grad_lap_dot: Vec<f64>,
    /// Nodes where every nested stencil is available.
    pub interior: Vec<usize>,
}

/// The three terms of the flat Bochner identity, fourth-order stencils.
pub fn bochner_terms(field: &FlatField) -> BochnerTerms {
    let dim = field.shape.len();
    let u = &field.values;
    let grad: Vec<Vec<f64>> = (0..dim).map(|a| derivative(field, u, a, 1)).collect();
    let mut hess = vec![vec![Vec::new(); dim]; dim];
    for a in 0..dim {
        hess[a][a] = derivative(field, u, a, 2);
        for b in a + 1..dim {
            let mixed = derivative(field, &grad[a], b, 1);
            hess[a][b] = mixed.clone();
            hess[b][a] = mixed;
        }
    }
    let n = u.len();
    let grad_sq: Vec<f64> = (0..n).map(|k| grad.iter().map(|g| g[k] * g[k]).sum()).collect();
    let lap_u: Vec<f64> = (0..n).map(|k| (0..dim).map(|a| hess[a][a][k]).sum()).collect();
    let lap_grad_sq: Vec<f64> = {
        let parts: Vec<Vec<f64>> = (0..dim).map(|a| derivative(field, &grad_sq, a, 2)).collect();
        (0..n).map(|k| parts.iter().map(|p| p[k]).sum()).collect()
    };
    let grad_lap: Vec<Vec<f64>> = (0..dim).map(|a| derivative(field, &lap_u, a, 1)).collect();

    let interior: Vec<usize> = (0..n)
        .filter(|&k| {
            field
                .unravel(k)
                .iter()
                .zip(&field.shape)
                .all(|(&i, &s)| i >= 4 && i + 4 < s)
        })
        .collect();
    BochnerTerms {
        half_lap_grad_sq: (0..n).map(|k| 0.5 * lap_grad_sq[k]).collect(),
        hess_sq: (0..n)
            .map(|k| {
                let mut s = 0.0;
                for row in &hess {
                    for h in row {
                        s += h[k] * h[k];
                    }
                }
                s
            })
            .collect(),
        grad_lap_dot: (0..n)
            .map(|k| (0..dim).map(|a| grad_lap[a][k] * grad[a][k]).sum())
            .collect(),
        interior,
    }
}

/// `max |½Δ|∇u|² − |Hess u|² − ⟨∇Δu, ∇u⟩|` over interior nodes.
pub fn bochner_residual(field: &FlatField) -> f64 {
    let t = bochner_terms(field);
    t.interior
        .iter()
        .map(|&k| (t.half_lap_grad_sq[k] - t.hess_sq[k] - t.grad_lap_dot[k]).abs())
        .fold(0.0, f64::max)
}

/// `Vol{|f|² < ε² mean(f²)} / Vol`, each sample standing for its cell.
pub fn sublevel_fraction(values: &[f64], eps: f64) -> Result<f64, SpectraError> {
    if values.is_empty() {
        return Err(SpectraError::ZeroField);
    }
    let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
    if mean_sq == 0.0 {
        return Err(SpectraError::ZeroField);
    }
    let threshold = eps * eps * mean_sq;
    let count = values.iter().filter(|v| *v * *v < threshold).count();
    Ok(count as f64 / values.len() as f64)
}

/// Cell-midpoint samples of `f` on the torus `[0, 2π)^dim` with `n` cells per axis.
pub fn torus_samples<F: Fn(&[f64]) -> f64 + Sync>(n: usize, dim: usize, f: F) -> Vec<f64> {
    let h = TAU / n as f64;
    (0..n.pow(dim as u32))
        .into_par_iter()
        .map(|mut k| {
            let mut x = vec![0.0; dim];
            for a in (0..dim).rev() {
                x[a] = (k % n) as f64 * h + 0.5 * h;
                k /= n;
            }
            f(&x)
        })
        .collect()
}

/// `(2/π) arcsin(ε/√2)`: the fraction of the circle where `|sin(mx)|² < ε²/2`.
pub fn sine_sublevel_oracle(eps: f64) -> f64 {
    2.0 / std::f64::consts::PI * (eps / std::f64::consts::SQRT_2).min(1.0).asin()
}

/// `|σ_m|` for `σ_m = cos(m x₁) dx₁ + sin(m x₁) dx₂` on the flat square torus.
pub fn torus_one_form_norm(m: u32, n: usize) -> Vec<f64> {
    torus_samples(n, 2, |x| {
        let t = m as f64 * x[0];
        t.cos().hypot(t.sin())
    })
}
