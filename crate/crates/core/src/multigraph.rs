//! Multi-valued graphs over the universal cover of the punctured plane.
//!
//! Samples live on a grid that is uniform in `(s, θ) = (log ρ, θ)`, with
//! `Δθ = 2π / K` and θ-nodes on the lattice `k Δθ`. Shifting by one turn is
//! then an exact index shift, and the conformal chart `(s, θ)` is grid-exact.
//!
//! The decomposition writes `f = u_x − i u_y` as `K / ζ + g(ζ)` on an inner
//! annular sector, with `K = b − i c / (2π)`, so that the standard piece
//! `a + b log(ρ/r) + c θ/(2π)` has gradient exactly `K / ζ`.

use std::f64::consts::{E, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{composite_gl, d1_order4, gauss_legendre, lagrange_uniform};

const INTERP_ORDER: usize = 6;
const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiGraphError {
    #[error("bad sector: {0}")]
    BadSector(String),
    #[error("2π is not an integer multiple of Δθ = {dtheta}")]
    GridMisaligned { dtheta: f64 },
    #[error("sector too small: {0}")]
    SectorTooSmall(String),
    #[error("non-finite samples")]
    NonFiniteSamples,
    #[error("separation changes sign")]
    SignChange,
    #[error("point (ρ = {rho}, θ = {theta}) lies outside the sampled sector")]
    OutsideSector { rho: f64, theta: f64 },
    #[error("expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// `S_{r1,r2}^{θ1,θ2} = { r1 ≤ ρ ≤ r2, θ1 ≤ θ ≤ θ2 }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub r1: f64,
    pub r2: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl Sector {
    pub fn new(r1: f64, r2: f64, theta1: f64, theta2: f64) -> Result<Self, MultiGraphError> {
        let s = Sector {
            r1,
            r2,
            theta1,
            theta2,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), MultiGraphError> {
        let all_finite = [self.r1, self.r2, self.theta1, self.theta2]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(MultiGraphError::BadSector("non-finite bounds".into()));
        }
        if !(self.r1 > 0.0 && self.r1 < self.r2) {
            return Err(MultiGraphError::BadSector(format!(
                "need 0 < r1 < r2, got r1 = {}, r2 = {}",
                self.r1, self.r2
            )));
        }
        if self.theta1 >= self.theta2 {
            return Err(MultiGraphError::BadSector(format!(
                "need θ1 < θ2, got {} and {}",
                self.theta1, self.theta2
            )));
        }
        Ok(())
    }
}

/// `v(ρ, θ) = a + b log(ρ/r) + c θ/(2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardPiece {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

impl StandardPiece {
    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        self.a + self.b * (rho / self.r).ln() + self.c * theta / TAU
    }
}

/// Grid resolution: radial node count and θ-nodes per full turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_rho: usize,
    pub per_turn: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            n_rho: 257,
            per_turn: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Model {
    /// `u = c θ / (2π)`
    Helicoid { c: f64 },
    /// `u = b log ρ`
    CatenoidLog { b: f64 },
    /// `u = arctan(θ / log ρ)`, only for `ρ > e`.
    SlabArctan,
    Standard(StandardPiece),
}

impl Model {
    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        match *self {
            Model::Helicoid { c } => c * theta / TAU,
            Model::CatenoidLog { b } => b * rho.ln(),
            Model::SlabArctan => (theta / rho.ln()).atan(),
            Model::Standard(p) => p.eval(rho, theta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    /// Sector actually covered by the nodes.
    pub sector: Sector,
    pub s0: f64,
    pub ds: f64,
    pub n_rho: usize,
    pub theta0: f64,
    pub dtheta: f64,
    pub n_theta: usize,
    /// `u[i * n_theta + j]` at `ρ = e^{s0 + i ds}`, `θ = θ0 + j Δθ`.
    pub u: Vec<f64>,
}

impl MultiGraph {
    pub fn from_samples(
        s0: f64,
        ds: f64,
        n_rho: usize,
        theta0: f64,
        dtheta: f64,
        n_theta: usize,
        u: Vec<f64>,
    ) -> Result<Self, MultiGraphError> {
        if n_rho < 5 || n_theta < 5 {
            return Err(MultiGraphError::BadSector(format!(
                "need at least 5 nodes per axis, got {n_rho}x{n_theta}"
            )));
        }
        if !(ds > 0.0 && dtheta > 0.0) || !s0.is_finite() || !theta0.is_finite() {
            return Err(MultiGraphError::BadSector("bad grid spacing".into()));
        }
        if u.len() != n_rho * n_theta {
            return Err(MultiGraphError::ShapeMismatch {
                expected: n_rho * n_theta,
                got: u.len(),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(MultiGraphError::NonFiniteSamples);
        }
        let sector = Sector {
            r1: s0.exp(),
            r2: (s0 + ds * (n_rho - 1) as f64).exp(),
            theta1: theta0,
            theta2: theta0 + dtheta * (n_theta - 1) as f64,
        };
        Ok(MultiGraph {
            sector,
            s0,
            ds,
            n_rho,
            theta0,
            dtheta,
            n_theta,
            u,
        })
    }

    /// Samples `f` with θ-nodes on the lattice `k · 2π/per_turn` inside the
    /// sector and `n_rho` log-uniform radii from `r1` to `r2`.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(
        sector: Sector,
        res: Resolution,
        f: F,
    ) -> Result<Self, MultiGraphError> {
        sector.validate()?;
        if res.n_rho < 5 || res.per_turn < 4 {
            return Err(MultiGraphError::BadSector(format!(
                "resolution too coarse: {res:?}"
            )));
        }
        let dtheta = TAU / res.per_turn as f64;
        let k_lo = (sector.theta1 / dtheta - LATTICE_TOL).ceil() as i64;
        let k_hi = (sector.theta2 / dtheta + LATTICE_TOL).floor() as i64;
        if k_hi - k_lo + 1 < 5 {
            return Err(MultiGraphError::BadSector(
                "θ-range holds fewer than 5 lattice nodes".into(),
            ));
        }
        let n_theta = (k_hi - k_lo + 1) as usize;
        let theta0 = k_lo as f64 * dtheta;
        let s0 = sector.r1.ln();
        let ds = (sector.r2 / sector.r1).ln() / (res.n_rho - 1) as f64;
        let u: Vec<f64> = (0..res.n_rho * n_theta)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n_theta, idx % n_theta);
                f((s0 + i as f64 * ds).exp(), theta0 + j as f64 * dtheta)
            })
            .collect();
        Self::from_samples(s0, ds, res.n_rho, theta0, dtheta, n_theta, u)
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.ds
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.s(i).exp()
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta0 + j as f64 * self.dtheta
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.n_theta + j]
    }

    /// Index of the θ-node equal to `theta`, if there is one.
    pub fn theta_index(&self, theta: f64) -> Option<usize> {
        let k = (theta - self.theta0) / self.dtheta;
        let r = k.round();
        if (k - r).abs() > LATTICE_TOL || r < 0.0 || r as usize >= self.n_theta {
            None
        } else {
            Some(r as usize)
        }
    }

    /// Nodes per full turn, if `Δθ` divides `2π`.
    pub fn per_turn(&self) -> Result<usize, MultiGraphError> {
        let k = TAU / self.dtheta;
        let r = k.round();
        if (k - r).abs() > LATTICE_TOL * k.max(1.0) || r < 1.0 {
            return Err(MultiGraphError::GridMisaligned {
                dtheta: self.dtheta,
            });
        }
        Ok(r as usize)
    }

    fn contains(&self, rho: f64, theta: f64) -> bool {
        let s = rho.ln();
        let s_hi = self.s(self.n_rho - 1);
        let t_hi = self.theta(self.n_theta - 1);
        let eps_s = LATTICE_TOL * self.ds;
        let eps_t = LATTICE_TOL * self.dtheta;
        s >= self.s0 - eps_s && s <= s_hi + eps_s && theta >= self.theta0 - eps_t && theta <= t_hi + eps_t
    }

    /// Sixth-order tensor Lagrange interpolation of `values` (same layout as
    /// `u`) at `(ρ, θ)`.
    pub fn interpolate(&self, values: &[f64], rho: f64, theta: f64) -> Result<f64, MultiGraphError> {
        if !self.contains(rho, theta) {
            return Err(MultiGraphError::OutsideSector { rho, theta });
        }
        let s = rho.ln();
        let order = INTERP_ORDER.min(self.n_theta);
        let pos = (theta - self.theta0) / self.dtheta;
        let start = ((pos - (order as f64 - 1.0) / 2.0).round() as isize)
            .clamp(0, (self.n_theta - order) as isize) as usize;
        let mut col = vec![0.0; self.n_rho];
        let mut row = Vec::with_capacity(order);
        for j in start..start + order {
            for (i, c) in col.iter_mut().enumerate() {
                *c = values[i * self.n_theta + j];
            }
            row.push(lagrange_uniform(self.s0, self.ds, &col, s, INTERP_ORDER));
        }
        Ok(lagrange_uniform(
            self.theta(start),
            self.dtheta,
            &row,
            theta,
            INTERP_ORDER,
        ))
    }

    pub fn value_at(&self, rho: f64, theta: f64) -> Result<f64, MultiGraphError> {
        self.interpolate(&self.u, rho, theta)
    }

    /// `(u_s, u_θ)` by fourth-order differences in the `(log ρ, θ)` chart.
    pub fn chart_gradient(&self) -> (Vec<f64>, Vec<f64>) {
        chart_gradient(&self.u, self.n_rho, self.n_theta, self.ds, self.dtheta)
    }

    /// `u_ss + u_θθ = ρ² Δu` at every node, second-order differences.
    pub fn chart_laplacian(&self) -> Vec<f64> {
        let (nr, nt) = (self.n_rho, self.n_theta);
        let mut out = vec![0.0; nr * nt];
        let mut col = vec![0.0; nr];
        for j in 0..nt {
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.at(i, j);
            }
            for i in 0..nr {
                out[i * nt + j] = d2_order2(&col, i, self.ds);
            }
        }
        for i in 0..nr {
            let row = &self.u[i * nt..(i + 1) * nt];
            for j in 0..nt {
                out[i * nt + j] += d2_order2(row, j, self.dtheta);
            }
        }
        out
    }

    /// Cartesian `Δu = (u_ss + u_θθ) / ρ²`.
    pub fn laplacian(&self) -> Vec<f64> {
        let mut lap = self.chart_laplacian();
        for i in 0..self.n_rho {
            let r2 = self.rho(i).powi(2);
            for v in &mut lap[i * self.n_theta..(i + 1) * self.n_theta] {
                *v /= r2;
            }
        }
        lap
    }

    /// `f = u_x − i u_y = e^{−iθ} (u_s − i u_θ) / ρ` at every node.
    pub fn complex_gradient(&self) -> Vec<Complex64> {
        let (us, ut) = self.chart_gradient();
        let nt = self.n_theta;
        (0..self.n_rho * nt)
            .map(|idx| {
                let (i, j) = (idx / nt, idx % nt);
                Complex64::from_polar(1.0 / self.rho(i), -self.theta(j))
                    * Complex64::new(us[idx], -ut[idx])
            })
            .collect()
    }

    /// The graph of `u(ρ, −θ)` on the mirrored lattice.
    pub fn reflect_theta(&self) -> MultiGraph {
        let nt = self.n_theta;
        let mut u = vec![0.0; self.u.len()];
        for i in 0..self.n_rho {
            for j in 0..nt {
                u[i * nt + j] = self.at(i, nt - 1 - j);
            }
        }
        let theta0 = -self.theta(nt - 1);
        MultiGraph {
            sector: Sector {
                r1: self.sector.r1,
                r2: self.sector.r2,
                theta1: theta0,
                theta2: -self.theta0,
            },
            u,
            theta0,
            ..self.clone()
        }
    }
}

fn chart_gradient(
    values: &[f64],
    nr: usize,
    nt: usize,
    ds: f64,
    dtheta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut us = vec![0.0; nr * nt];
    let mut ut = vec![0.0; nr * nt];
    let mut col = vec![0.0; nr];
    for j in 0..nt {
        for (i, c) in col.iter_mut().enumerate() {
            *c = values[i * nt + j];
        }
        for i in 0..nr {
            us[i * nt + j] = d1_order4(&col, i, ds);
        }
    }
    for i in 0..nr {
        let row = &values[i * nt..(i + 1) * nt];
        for j in 0..nt {
            ut[i * nt + j] = d1_order4(row, j, dtheta);
        }
    }
    (us, ut)
}

fn d2_order2(v: &[f64], k: usize, h: f64) -> f64 {
    let n = v.len();
    if k == 0 {
        (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
    } else if k == n - 1 {
        (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h)
    } else {
        (v[k + 1] - 2.0 * v[k] + v[k - 1]) / (h * h)
    }
}

pub fn build_model(model: Model, sector: Sector, res: Resolution) -> Result<MultiGraph, MultiGraphError> {
    sector.validate()?;
    if matches!(model, Model::SlabArctan) && sector.r1 <= E {
        return Err(MultiGraphError::BadSector(format!(
            "slab model needs r1 > e, got {}",
            sector.r1
        )));
    }
    if let Model::Standard(p) = model {
        if !(p.r > 0.0) || ![p.a, p.b, p.c, p.r].iter().all(|v| v.is_finite()) {
            return Err(MultiGraphError::BadSector(format!("bad standard piece {p:?}")));
        }
    }
    MultiGraph::from_fn(sector, res, |rho, theta| model.eval(rho, theta))
}

/// `w(ρ, θ) = u(ρ, θ + 2π) − u(ρ, θ)` on the θ-nodes where both are sampled.
pub fn separation(g: &MultiGraph) -> Result<MultiGraph, MultiGraphError> {
    let k = g.per_turn()?;
    if g.n_theta < k + 5 {
        return Err(MultiGraphError::SectorTooSmall(
            "θ-range must exceed one turn by at least 4 nodes".into(),
        ));
    }
    let nt = g.n_theta - k;
    let mut w = Vec::with_capacity(g.n_rho * nt);
    for i in 0..g.n_rho {
        for j in 0..nt {
            w.push(g.at(i, j + k) - g.at(i, j));
        }
    }
    MultiGraph::from_samples(g.s0, g.ds, g.n_rho, g.theta0, g.dtheta, nt, w)
}

/// `+1`, `−1`, or `0` when the samples are not strictly one-signed.
pub fn separation_sign(w: &MultiGraph) -> i8 {
    if w.u.iter().all(|&v| v > 0.0) {
        1
    } else if w.u.iter().all(|&v| v < 0.0) {
        -1
    } else {
        0
    }
}

/// `|w|(r2, 0) − |w|(r1, 0) (r2/r1)^α`; non-positive when the separation grows
/// at most like `ρ^α`.
pub fn sublinear_defect(w: &MultiGraph, alpha: f64, r1: f64, r2: f64) -> Result<f64, MultiGraphError> {
    if separation_sign(w) == 0 {
        return Err(MultiGraphError::SignChange);
    }
    let w1 = w.value_at(r1, 0.0)?.abs();
    let w2 = w.value_at(r2, 0.0)?.abs();
    Ok(w2 - w1 * (r2 / r1).powf(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    /// `ρ |∇ log |w||` at the query point.
    pub value: f64,
    pub alpha: f64,
    pub holds: bool,
}

/// `ρ |∇ log |w|| = |(∂_s, ∂_θ) log |w||`, compared against `α`.
pub fn log_separation_gradient(
    w: &MultiGraph,
    rho: f64,
    theta: f64,
    alpha: f64,
) -> Result<GradientCheck, MultiGraphError> {
    if separation_sign(w) == 0 {
        return Err(MultiGraphError::SignChange);
    }
    let logw: Vec<f64> = w.u.iter().map(|v| v.abs().ln()).collect();
    let (ps, pt) = chart_gradient(&logw, w.n_rho, w.n_theta, w.ds, w.dtheta);
    let gs = w.interpolate(&ps, rho, theta)?;
    let gt = w.interpolate(&pt, rho, theta)?;
    let value = gs.hypot(gt);
    Ok(GradientCheck {
        value,
        alpha,
        holds: value <= alpha,
    })
}

/// `sup ρ |∇w| / |w|` over the separation grid; `NaN` if `w` changes sign.
pub fn epsilon_wantit(w: &MultiGraph) -> f64 {
    if separation_sign(w) == 0 {
        return f64::NAN;
    }
    let (ws, wt) = w.chart_gradient();
    ws.iter()
        .zip(&wt)
        .zip(&w.u)
        .map(|((a, b), v)| a.hypot(*b) / v.abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorCoefficients {
    /// The contour is `S_{ρ_in, √R}^{α, α+2π}`.
    pub alpha: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualField {
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    /// `g` at `(rho[i], theta[j])`, index `i * theta.len() + j`.
    pub values: Vec<Complex64>,
}

impl ResidualField {
    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sup |ζ| |g(ζ)|`
    pub fn sup_weighted(&self) -> f64 {
        let nt = self.theta.len();
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| self.rho[k / nt] * v.norm())
            .fold(0.0, f64::max)
    }

    /// `(ρ, max_θ |g|)` per radius.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        let nt = self.theta.len();
        self.rho
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let m = self.values[i * nt..(i + 1) * nt]
                    .iter()
                    .map(|v| v.norm())
                    .fold(0.0, f64::max);
                (r, m)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub b: f64,
    pub c: f64,
    pub r1: f64,
    pub big_r: f64,
    /// Radius of the inner contour circle, `max(1, ρ_min)`.
    pub inner: f64,
    /// Coefficients from the contours at `α = 0, −π/2, π/2`.
    pub sectors: Vec<SectorCoefficients>,
    /// `g = f − (b − i c/2π)/ζ` on `S_{2r1, √R/2}^{0, 2π}`.
    pub residual: ResidualField,
    pub epsilon_wantit: f64,
    pub separation_sign: i8,
}

impl Decomposition {
    /// `max |Δb|, |Δc|` between the α = 0 coefficients and the other sectors.
    pub fn cross_sector_spread(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| (s.b - self.b).abs().max((s.c - self.c).abs()))
            .fold(0.0, f64::max)
    }
}

struct Fields<'a> {
    g: &'a MultiGraph,
    /// real and imaginary parts of `f`, column-major for radial interpolation
    f_cols: Vec<(Vec<f64>, Vec<f64>)>,
    /// `ρ² Δu` row integrals are built on demand from this
    chart_lap: Vec<f64>,
}

impl<'a> Fields<'a> {
    fn new(g: &'a MultiGraph) -> Self {
        let f = g.complex_gradient();
        let nt = g.n_theta;
        let f_cols = (0..nt)
            .map(|j| {
                let re = (0..g.n_rho).map(|i| f[i * nt + j].re).collect();
                let im = (0..g.n_rho).map(|i| f[i * nt + j].im).collect();
                (re, im)
            })
            .collect();
        Fields {
            g,
            f_cols,
            chart_lap: g.chart_laplacian(),
        }
    }

    fn f_at(&self, j: usize, s: f64) -> Complex64 {
        let (re, im) = &self.f_cols[j];
        Complex64::new(
            lagrange_uniform(self.g.s0, self.g.ds, re, s, INTERP_ORDER),
            lagrange_uniform(self.g.s0, self.g.ds, im, s, INTERP_ORDER),
        )
    }

    /// `∫_{θ_ja}^{θ_ja + 2π} f(ρ, θ) h(z) dz` on the circle `|z| = e^s`, trapezoid.
    fn circle<H: Fn(Complex64) -> Complex64>(&self, s: f64, ja: usize, k: usize, h: H) -> Complex64 {
        let rho = s.exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..=k {
            let j = ja + m;
            let z = Complex64::from_polar(rho, self.g.theta(j));
            let w = if m == 0 || m == k { 0.5 } else { 1.0 };
            acc += w * self.f_at(j, s) * h(z) * Complex64::i() * z;
        }
        acc * self.g.dtheta
    }

    /// `∫_{e^{s_a}}^{e^{s_b}} (f(ρ, α+2π) − f(ρ, α)) h(ρ) dρ`, composite Gauss–Legendre in `s`.
    fn slit<H: Fn(f64) -> Complex64>(&self, s_a: f64, s_b: f64, ja: usize, k: usize, h: H) -> Complex64 {
        if s_b <= s_a {
            return Complex64::new(0.0, 0.0);
        }
        let rule = gauss_legendre(8);
        let segments = ((s_b - s_a) / self.g.ds).ceil().max(1.0) as usize;
        let integrand = |s: f64| {
            let rho = s.exp();
            (self.f_at(ja + k, s) - self.f_at(ja, s)) * h(rho) * rho
        };
        let re = composite_gl(s_a, s_b, segments, &rule, |s| integrand(s).re);
        let im = composite_gl(s_a, s_b, segments, &rule, |s| integrand(s).im);
        Complex64::new(re, im)
    }

    /// `∬_{S_{e^{s_a}, e^{s_b}}^{α, α+2π}} Δu dA = ∫∫ (u_ss + u_θθ) ds dθ`.
    fn laplacian_mass(&self, s_a: f64, s_b: f64, ja: usize, k: usize) -> f64 {
        if s_b <= s_a {
            return 0.0;
        }
        let g = self.g;
        let nt = g.n_theta;
        let rows: Vec<f64> = (0..g.n_rho)
            .map(|i| {
                (0..=k)
                    .map(|m| {
                        let w = if m == 0 || m == k { 0.5 } else { 1.0 };
                        w * self.chart_lap[i * nt + ja + m]
                    })
                    .sum::<f64>()
                    * g.dtheta
            })
            .collect();
        let rule = gauss_legendre(8);
        let segments = ((s_b - s_a) / g.ds).ceil().max(1.0) as usize;
        composite_gl(s_a, s_b, segments, &rule, |s| {
            lagrange_uniform(g.s0, g.ds, &rows, s, INTERP_ORDER)
        })
    }
}

fn lattice_alpha(g: &MultiGraph, alpha: f64, k: usize) -> Result<usize, MultiGraphError> {
    let ja = g.theta_index(alpha).ok_or_else(|| {
        MultiGraphError::SectorTooSmall(format!("θ = {alpha} is not a sampled lattice node"))
    })?;
    if ja + k >= g.n_theta {
        return Err(MultiGraphError::SectorTooSmall(format!(
            "θ-range does not contain [{alpha}, {alpha} + 2π]"
        )));
    }
    Ok(ja)
}

/// The 1/ζ coefficient `K = b − i c/(2π)` from the contour `S_{inner,√R}^{α,α+2π}`:
/// `2πi K = ∮_{inner} f dz + e^{iα} ∫_{inner}^{r1} (f(ρ,α+2π) − f(ρ,α)) dρ + i ∬_{S_{inner,r1}} Δu`.
fn coefficient(fields: &Fields, alpha: f64, inner: f64, r1: f64, k: usize) -> Result<Complex64, MultiGraphError> {
    let g = fields.g;
    let ja = lattice_alpha(g, alpha, k)?;
    let (s_in, s_r1) = (inner.ln(), r1.ln());
    let one = |_: Complex64| Complex64::new(1.0, 0.0);
    let circle = fields.circle(s_in, ja, k, one);
    let rot = Complex64::from_polar(1.0, g.theta(ja));
    let slit = rot * fields.slit(s_in, s_r1, ja, k, |_| Complex64::new(1.0, 0.0));
    let mass = fields.laplacian_mass(s_in, s_r1, ja, k);
    Ok((circle + slit + Complex64::i() * mass) / Complex64::new(0.0, TAU))
}

fn check_decompose(g: &MultiGraph, r1: f64, big_r: f64) -> Result<(f64, usize), MultiGraphError> {
    let k = g.per_turn()?;
    if k % 4 != 0 {
        return Err(MultiGraphError::GridMisaligned { dtheta: g.dtheta });
    }
    if !(r1.is_finite() && big_r.is_finite()) {
        return Err(MultiGraphError::SectorTooSmall("non-finite radii".into()));
    }
    let inner = g.sector.r1.max(1.0);
    let outer = big_r.sqrt();
    if r1 < inner * (1.0 - LATTICE_TOL) {
        return Err(MultiGraphError::SectorTooSmall(format!(
            "r1 = {r1} is below the inner contour radius {inner}"
        )));
    }
    if 2.0 * r1 > outer / 2.0 {
        return Err(MultiGraphError::SectorTooSmall(format!(
            "need 2 r1 ≤ √R / 2, got r1 = {r1}, √R = {outer}"
        )));
    }
    if outer > g.sector.r2 * (1.0 + LATTICE_TOL) {
        return Err(MultiGraphError::SectorTooSmall(format!(
            "√R = {outer} exceeds the sampled radius {}",
            g.sector.r2
        )));
    }
    for a in [-PI / 2.0, 0.0, PI / 2.0] {
        lattice_alpha(g, a, k)?;
    }
    Ok((inner, k))
}

/// Splits `f = u_x − i u_y` into `(b − i c/2π)/ζ + g(ζ)` on `S_{2r1, √R/2}^{0,2π}`.
pub fn cauchy_decompose(g: &MultiGraph, r1: f64, big_r: f64) -> Result<Decomposition, MultiGraphError> {
    let (inner, k) = check_decompose(g, r1, big_r)?;
    let fields = Fields::new(g);
    let sectors: Vec<SectorCoefficients> = [0.0, -PI / 2.0, PI / 2.0]
        .par_iter()
        .map(|&alpha| {
            coefficient(&fields, alpha, inner, r1, k).map(|kk| SectorCoefficients {
                alpha,
                b: kk.re,
                c: -TAU * kk.im,
            })
        })
        .collect::<Result<_, _>>()?;
    let (b, c) = (sectors[0].b, sectors[0].c);
    let kk = Complex64::new(b, -c / TAU);

    let f = g.complex_gradient();
    let (lo, hi) = (2.0 * r1, big_r.sqrt() / 2.0);
    let tol = LATTICE_TOL * g.ds;
    let rows: Vec<usize> = (0..g.n_rho)
        .filter(|&i| g.s(i) >= lo.ln() - tol && g.s(i) <= hi.ln() + tol)
        .collect();
    let j0 = g.theta_index(0.0).expect("checked above");
    let cols: Vec<usize> = (j0..=j0 + k).collect();
    if rows.is_empty() {
        return Err(MultiGraphError::SectorTooSmall(
            "no radial nodes inside [2 r1, √R / 2]".into(),
        ));
    }
    let values: Vec<Complex64> = rows
        .par_iter()
        .flat_map_iter(|&i| {
            let f = &f;
            cols.iter().map(move |&j| {
                let zeta = Complex64::from_polar(g.rho(i), g.theta(j));
                f[i * g.n_theta + j] - kk / zeta
            })
        })
        .collect();
    let residual = ResidualField {
        rho: rows.iter().map(|&i| g.rho(i)).collect(),
        theta: cols.iter().map(|&j| g.theta(j)).collect(),
        values,
    };

    let (epsilon, sign) = match separation(g) {
        Ok(w) => (epsilon_wantit(&w), separation_sign(&w)),
        Err(_) => (f64::NAN, 0),
    };
    Ok(Decomposition {
        b,
        c,
        r1,
        big_r,
        inner,
        sectors,
        residual,
        epsilon_wantit: epsilon,
        separation_sign: sign,
    })
}

/// Evaluates the full Cauchy representation of `f(ζ)` from the contour
/// `S_{inner,√R}^{α,α+2π}`: outer and inner circles, the `Δu` area term and the
/// two slit edges. `ζ` must lie inside that sector, away from the slit.
pub fn cauchy_reconstruct(
    g: &MultiGraph,
    big_r: f64,
    alpha: f64,
    zeta: Complex64,
) -> Result<Complex64, MultiGraphError> {
    let k = g.per_turn()?;
    let ja = lattice_alpha(g, alpha, k)?;
    let inner = g.sector.r1.max(1.0);
    let outer = big_r.sqrt();
    if outer > g.sector.r2 * (1.0 + LATTICE_TOL) || outer <= inner {
        return Err(MultiGraphError::SectorTooSmall(format!("bad √R = {outer}")));
    }
    let fields = Fields::new(g);
    let kernel = |z: Complex64| 1.0 / (z - zeta);
    let (s_in, s_out) = (inner.ln(), outer.ln());
    let c_out = fields.circle(s_out, ja, k, kernel);
    let c_in = fields.circle(s_in, ja, k, kernel);
    let rot = Complex64::from_polar(1.0, g.theta(ja));
    // the slit edges run outward at θ = α and inward at θ = α + 2π
    let slit = -rot * fields.slit(s_in, s_out, ja, k, |rho| kernel(rot * rho));

    // Δu dA = (u_ss + u_θθ) ds dθ; node trapezoid, nodes on ζ skipped
    let nt = g.n_theta;
    let mut area = Complex64::new(0.0, 0.0);
    let tol = LATTICE_TOL * g.ds;
    for i in 0..g.n_rho {
        let s = g.s(i);
        if s < s_in - tol || s > s_out + tol {
            continue;
        }
        let wi = if (s - s_in).abs() <= tol || (s - s_out).abs() <= tol {
            0.5
        } else {
            1.0
        };
        for m in 0..=k {
            let j = ja + m;
            let z = Complex64::from_polar(g.rho(i), g.theta(j));
            if (z - zeta).norm() < 1e-12 {
                continue;
            }
            let wj = if m == 0 || m == k { 0.5 } else { 1.0 };
            area += wi * wj * fields.chart_lap[i * nt + j] * kernel(z);
        }
    }
    area *= g.ds * g.dtheta;

    Ok((c_out - c_in - Complex64::i() * area + slit) / Complex64::new(0.0, TAU))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardFit {
    pub piece: StandardPiece,
    /// `sup |u − v|` over the sampled nodes of `S_{r1, μ r1}^{0, 2π}`.
    pub misfit: f64,
    pub decomposition: Decomposition,
}

/// Standard piece on the scale `r1`: `b`, `c` from [`cauchy_decompose`], `a`
/// the mean of `u − b log(ρ/r1) − cθ/2π` over `S_{r1, μ r1}^{0, 2π}` in the
/// `(log ρ, θ)` chart.
pub fn fit_standard_piece(g: &MultiGraph, r1: f64, mu: f64, big_r: f64) -> Result<StandardFit, MultiGraphError> {
    if !(mu > 1.0) || mu * r1 > big_r.sqrt() / 2.0 * (1.0 + LATTICE_TOL) {
        return Err(MultiGraphError::SectorTooSmall(format!(
            "need μ > 1 and μ r1 ≤ √R / 2, got μ = {mu}"
        )));
    }
    let d = cauchy_decompose(g, r1, big_r)?;
    let k = g.per_turn()?;
    let j0 = g.theta_index(0.0).expect("checked by cauchy_decompose");
    let tol = LATTICE_TOL * g.ds;
    let rows: Vec<usize> = (0..g.n_rho)
        .filter(|&i| g.s(i) >= r1.ln() - tol && g.s(i) <= (mu * r1).ln() + tol)
        .collect();
    if rows.is_empty() {
        return Err(MultiGraphError::SectorTooSmall(
            "no radial nodes inside [r1, μ r1]".into(),
        ));
    }
    let base = StandardPiece {
        a: 0.0,
        b: d.b,
        c: d.c,
        r: r1,
    };
    let mut sum = 0.0;
    let mut weight = 0.0;
    for (n, &i) in rows.iter().enumerate() {
        let wi = if rows.len() > 1 && (n == 0 || n == rows.len() - 1) {
            0.5
        } else {
            1.0
        };
        for m in 0..=k {
            let j = j0 + m;
            let wj = if m == 0 || m == k { 0.5 } else { 1.0 };
            sum += wi * wj * (g.at(i, j) - base.eval(g.rho(i), g.theta(j)));
            weight += wi * wj;
        }
    }
    let piece = StandardPiece {
        a: sum / weight,
        ..base
    };
    let misfit = rows
        .iter()
        .flat_map(|&i| (j0..=j0 + k).map(move |j| (i, j)))
        .map(|(i, j)| (g.at(i, j) - piece.eval(g.rho(i), g.theta(j))).abs())
        .fold(0.0, f64::max);
    Ok(StandardFit {
        piece,
        misfit,
        decomposition: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fit_slope;

    fn sector(r1: f64, r2: f64, t1: f64, t2: f64) -> Sector {
        Sector::new(r1, r2, t1, t2).unwrap()
    }

    fn res(n_rho: usize, per_turn: usize) -> Resolution {
        Resolution { n_rho, per_turn }
    }

    fn standard(a: f64, b: f64, c: f64) -> Model {
        Model::Standard(StandardPiece { a, b, c, r: 1.0 })
    }

    #[test]
    fn helicoid_sheet_has_constant_separation() {
        let g = build_model(Model::Helicoid { c: TAU }, sector(1.0, 8.0, 0.0, 4.0 * PI), res(33, 64)).unwrap();
        for i in 0..g.n_rho {
            for j in 0..g.n_theta {
                assert!((g.at(i, j) - g.theta(j)).abs() < 1e-14);
            }
        }
        let w = separation(&g).unwrap();
        assert!(w.u.iter().all(|v| (v - TAU).abs() < 1e-12));
    }

    #[test]
    fn standard_piece_evaluation_and_separation() {
        let p = StandardPiece { a: 1.0, b: 2.0, c: 3.0, r: 1.0 };
        assert!((p.eval(E, 0.0) - 3.0).abs() < 1e-15);
        let g = build_model(Model::Standard(p), sector(1.0, 8.0, -PI, 3.0 * PI), res(33, 64)).unwrap();
        let w = separation(&g).unwrap();
        assert!(w.u.iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn standard_piece_is_harmonic() {
        let g = build_model(standard(0.5, -1.5, 2.0), sector(1.0, 20.0, 0.0, TAU), res(65, 64)).unwrap();
        let lap = g.laplacian();
        assert!(lap.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn slab_stays_in_slab_and_separation_matches_closed_form() {
        let s = sector(E * E, E.powi(8), -TAU, 2.0 * TAU);
        let g = build_model(Model::SlabArctan, s, res(61, 64)).unwrap();
        assert!(g.u.iter().all(|v| v.abs() <= PI / 2.0));
        let w = separation(&g).unwrap();
        let j0 = w.theta_index(0.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..w.n_rho {
            let oracle = (TAU / w.s(i)).atan();
            let v = w.at(i, j0);
            assert!((v - oracle).abs() < 1e-14);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        assert_eq!(separation_sign(&w), 1);
    }

    #[test]
    fn slab_needs_log_radius_above_one() {
        let err = build_model(Model::SlabArctan, sector(2.0, 100.0, 0.0, TAU), res(17, 16));
        assert!(matches!(err, Err(MultiGraphError::BadSector(_))));
    }

    #[test]
    fn misaligned_theta_grid_is_rejected() {
        let u = vec![0.0; 5 * 40];
        let g = MultiGraph::from_samples(0.0, 0.1, 5, 0.0, 0.3, 40, u).unwrap();
        assert!(matches!(separation(&g), Err(MultiGraphError::GridMisaligned { .. })));
    }

    fn power_law(beta: f64) -> MultiGraph {
        MultiGraph::from_fn(sector(1.0, 64.0, -1.0, 1.0), res(129, 64), |rho, _| rho.powf(beta)).unwrap()
    }

    #[test]
    fn sublinear_defect_cases() {
        let g = build_model(Model::Helicoid { c: TAU }, sector(1.0, 8.0, 0.0, 4.0 * PI), res(33, 64)).unwrap();
        let w = separation(&g).unwrap();
        let d = sublinear_defect(&w, 0.5, 1.0, 4.0).unwrap();
        assert!((d - (TAU - 2.0 * TAU)).abs() < 1e-10);

        let slow = sublinear_defect(&power_law(0.3), 0.5, 2.0, 8.0).unwrap();
        let oracle = 8f64.powf(0.3) - 2f64.powf(0.3) * 4f64.powf(0.5);
        assert!(slow < 0.0 && (slow - oracle).abs() < 1e-8);

        let fast = sublinear_defect(&power_law(1.0), 0.5, 2.0, 8.0).unwrap();
        assert!(fast > 0.0 && (fast - 4.0).abs() < 1e-8);
    }

    #[test]
    fn sign_change_is_rejected() {
        let g = MultiGraph::from_fn(sector(1.0, 8.0, -1.0, 1.0), res(17, 64), |rho, _| rho - 2.0).unwrap();
        assert_eq!(
            sublinear_defect(&g, 0.5, 1.0, 4.0),
            Err(MultiGraphError::SignChange)
        );
        assert!(matches!(
            log_separation_gradient(&g, 2.0, 0.0, 0.5),
            Err(MultiGraphError::SignChange)
        ));
    }

    #[test]
    fn log_gradient_of_power_law_and_helicoid() {
        let c = log_separation_gradient(&power_law(0.7), 5.0, 0.1, 1.0).unwrap();
        assert!((c.value - 0.7).abs() < 1e-6, "{}", c.value);
        assert!(c.holds);
        let g = build_model(Model::Helicoid { c: TAU }, sector(1.0, 8.0, 0.0, 4.0 * PI), res(33, 64)).unwrap();
        let w = separation(&g).unwrap();
        assert!(log_separation_gradient(&w, 3.0, 1.0, 0.1).unwrap().value < 1e-10);
    }

    #[test]
    fn log_gradient_of_slab_separation() {
        let g = build_model(Model::SlabArctan, sector(E * E, E.powi(8), -TAU, 2.0 * TAU), res(241, 256)).unwrap();
        let w = separation(&g).unwrap();
        let s: f64 = 4.0;
        let d = s * s + 4.0 * PI * PI;
        let w0 = (TAU / s).atan();
        let ws = -TAU / d;
        let wt = s / d - 1.0 / s;
        let oracle = ws.hypot(wt) / w0;
        let got = log_separation_gradient(&w, s.exp(), 0.0, 1.0).unwrap().value;
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn reflection_flips_separation_sign() {
        let g = build_model(standard(0.3, 1.0, 2.5), sector(1.0, 8.0, -PI, 3.0 * PI), res(17, 32)).unwrap();
        let w = separation(&g).unwrap();
        let wr = separation(&g.reflect_theta()).unwrap();
        assert_eq!(separation_sign(&w), 1);
        assert_eq!(separation_sign(&wr), -1);
        assert!(wr.u.iter().all(|v| (v + 2.5).abs() < 1e-12));
    }

    fn criterion_sector() -> Sector {
        sector(1.0, 64.0, -PI, 3.0 * PI)
    }

    #[test]
    fn helicoid_and_catenoid_coefficients() {
        let r = res(193, 128);
        let g = build_model(Model::Helicoid { c: 1.7 }, criterion_sector(), r).unwrap();
        let d = cauchy_decompose(&g, 4.0, 4096.0).unwrap();
        assert!(d.b.abs() < 1e-6 && (d.c - 1.7).abs() < 1e-6, "{} {}", d.b, d.c);
        assert!(d.residual.sup() < 1e-6);

        let g = build_model(Model::CatenoidLog { b: -0.8 }, criterion_sector(), r).unwrap();
        let d = cauchy_decompose(&g, 4.0, 4096.0).unwrap();
        assert!((d.b + 0.8).abs() < 1e-6 && d.c.abs() < 1e-6);
        assert!(d.residual.sup() < 1e-6);
    }

    #[test]
    fn constant_has_no_coefficients() {
        let g = MultiGraph::from_fn(criterion_sector(), res(65, 64), |_, _| 4.2).unwrap();
        let d = cauchy_decompose(&g, 4.0, 4096.0).unwrap();
        // one-sided edge stencils leave only round-off
        assert!(d.b.abs() < 1e-12 && d.c.abs() < 1e-12);
        assert!(d.residual.sup() < 1e-12);
    }

    #[test]
    fn exact_standard_piece_is_recovered() {
        let g = build_model(standard(1.0, 2.0, 3.0), criterion_sector(), res(193, 128)).unwrap();
        let fit = fit_standard_piece(&g, 4.0, 2.0, 4096.0).unwrap();
        let p = fit.piece;
        assert!((p.b - 2.0).abs() < 1e-6 && (p.c - 3.0).abs() < 1e-6);
        // v = a + b log(ρ/r1): a absorbs b log r1
        assert!((p.a - (1.0 + 2.0 * 4f64.ln())).abs() < 1e-6);
        assert!(fit.misfit < 1e-6);
        assert!(fit.decomposition.cross_sector_spread() < 1e-6);
        assert!(fit.decomposition.residual.sup() < 1e-6);
    }

    #[test]
    fn perturbed_standard_piece() {
        let delta = 1e-3;
        let g = MultiGraph::from_fn(criterion_sector(), res(193, 128), |rho, theta| {
            1.0 + 2.0 * rho.ln() + 3.0 * theta / TAU + delta * rho.powf(-0.5) * theta.sin()
        })
        .unwrap();
        let fit = fit_standard_piece(&g, 4.0, 2.0, 4096.0).unwrap();
        assert!((fit.piece.b - 2.0).abs() < 2e-3);
        assert!((fit.piece.c - 3.0).abs() < 2e-3);
        assert!(fit.misfit < 5e-3, "{}", fit.misfit);
    }

    #[test]
    fn residual_decays_like_inverse_radius() {
        let g = MultiGraph::from_fn(criterion_sector(), res(193, 128), |rho, theta| {
            0.7 * theta / TAU + 1.3 * rho.ln() + 0.05 * theta.cos() / rho
        })
        .unwrap();
        let d = cauchy_decompose(&g, 2.0, 4096.0).unwrap();
        let prof = d.residual.radial_profile();
        let xs: Vec<f64> = prof.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = prof.iter().map(|p| p.1.ln()).collect();
        let slope = fit_slope(&xs, &ys);
        assert!(slope <= -0.9, "slope {slope}");
    }

    #[test]
    fn residual_shrinks_with_scale() {
        let g = MultiGraph::from_fn(sector(1.0, 256.0, -PI, 3.0 * PI), res(257, 128), |rho, theta| {
            theta / TAU + 0.2 * theta.sin() / rho.sqrt()
        })
        .unwrap();
        let a = cauchy_decompose(&g, 2.0, 1024.0).unwrap().residual.sup();
        let b = cauchy_decompose(&g, 8.0, 65536.0).unwrap().residual.sup();
        assert!(b < a, "{a} -> {b}");
    }

    #[test]
    fn reconstruction_matches_gradient() {
        let g = MultiGraph::from_fn(criterion_sector(), res(193, 128), |rho, theta| {
            0.4 + 1.1 * rho.ln() - 2.0 * theta / TAU + 0.3 * (2.0 * theta).cos() / (rho * rho)
        })
        .unwrap();
        let f = g.complex_gradient();
        for (rho, theta) in [(10.0f64, PI), (12.0, 2.5), (20.0, 3.9)] {
            let i = ((rho.ln() - g.s0) / g.ds).round() as usize;
            let j = g.theta_index((theta / g.dtheta).round() * g.dtheta).unwrap();
            let zeta = Complex64::from_polar(g.rho(i), g.theta(j));
            let rec = cauchy_reconstruct(&g, 4096.0, 0.0, zeta).unwrap();
            let direct = f[i * g.n_theta + j];
            // the area term uses the second-order measured Laplacian
            assert!((rec - direct).norm() < 1e-5, "{rec} vs {direct}");
        }
    }

    #[test]
    fn slab_coefficients_flatten_at_large_scale() {
        let g = build_model(Model::SlabArctan, sector(3.0, E.powi(16), -PI, 3.0 * PI), res(321, 128)).unwrap();
        let near = fit_standard_piece(&g, 4.0, 2.0, 1e4).unwrap();
        let far = fit_standard_piece(&g, E.powi(5), 2.0, E.powi(16)).unwrap();
        assert!(far.piece.c.abs() < near.piece.c.abs());
        assert!(far.misfit < near.misfit);
    }

    #[test]
    fn decompose_preconditions() {
        let g = build_model(Model::Helicoid { c: 1.0 }, criterion_sector(), res(65, 64)).unwrap();
        assert!(matches!(cauchy_decompose(&g, 20.0, 4096.0), Err(MultiGraphError::SectorTooSmall(_))));
        assert!(matches!(cauchy_decompose(&g, 4.0, 1e6), Err(MultiGraphError::SectorTooSmall(_))));
        let narrow = build_model(Model::Helicoid { c: 1.0 }, sector(1.0, 64.0, 0.0, TAU), res(65, 64)).unwrap();
        assert!(matches!(cauchy_decompose(&narrow, 4.0, 4096.0), Err(MultiGraphError::SectorTooSmall(_))));
    }
}
