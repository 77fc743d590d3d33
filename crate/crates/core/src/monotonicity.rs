//! Density ratios `Θ_{x₀}(s) = Area(B_s(x₀) ∩ Σ)/(πs²)`, weighted mean
//! values of subharmonic functions and Huisken's Gaussian density.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::geomcore::{
    integrate_field, patch_area, surface_laplacian, weighted_area, GeomError,
    ParamPatch, Vec3,
};
use crate::graphflow::{FlowTrace, GraphFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("radii must be positive and strictly increasing")]
    BadRadii,
    #[error("weight must be non-negative")]
    NegativeWeight,
    #[error("function is not subharmonic: min Δf = {min_laplacian:e}")]
    NotSubharmonic { min_laplacian: f64 },
    #[error("expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySeries {
    pub center: Vec3,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// A boundary node lies inside the ball, so part of it may be missing.
    pub clipped: Vec<bool>,
}

fn check_radii(radii: &[f64]) -> Result<(), DensityError> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DensityError::BadRadii);
    }
    Ok(())
}

fn clipped_flags(patch: &ParamPatch, x0: &Vec3, radii: &[f64]) -> Vec<bool> {
    let nearest = patch
        .boundary_nodes()
        .iter()
        .map(|&k| (patch.points()[k] - x0).norm())
        .fold(f64::INFINITY, f64::min);
    radii.iter().map(|&s| nearest < s).collect()
}

pub fn density_ratio(patch: &ParamPatch, x0: &Vec3, radii: &[f64]) -> Result<DensitySeries, DensityError> {
    check_radii(radii)?;
    let values = radii
        .par_iter()
        .map(|&s| patch_area(patch, |c| (c - x0).norm_squared() < s * s) / (PI * s * s))
        .collect();
    Ok(DensitySeries {
        center: *x0,
        radii: radii.to_vec(),
        values,
        clipped: clipped_flags(patch, x0, radii),
    })
}

/// `min_i (Θ(s_{i+1}) − Θ(s_i))`
pub fn monotone_defect(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Ball area with every cell split into `k × k` bilinear sub-cells, each
/// tested at its own centroid. Uses the same samples as [`patch_area`].
fn refined_ball_area(patch: &ParamPatch, x0: &Vec3, s: f64, k: usize) -> f64 {
    let (ds, dt) = (patch.ds() / k as f64, patch.dt() / k as f64);
    let mut total = 0.0;
    for (i, j, jn) in patch.cells() {
        let p00 = patch.point(i, j);
        let p10 = patch.point(i + 1, j);
        let p01 = patch.point(i, jn);
        let p11 = patch.point(i + 1, jn);
        let bil = |a: f64, b: f64| {
            p00 * ((1.0 - a) * (1.0 - b)) + p10 * (a * (1.0 - b)) + p01 * ((1.0 - a) * b) + p11 * (a * b)
        };
        let h = 1.0 / k as f64;
        for a in 0..k {
            for b in 0..k {
                let (a0, b0) = (a as f64 * h, b as f64 * h);
                let q00 = bil(a0, b0);
                let q10 = bil(a0 + h, b0);
                let q01 = bil(a0, b0 + h);
                let q11 = bil(a0 + h, b0 + h);
                let c = (q00 + q10 + q01 + q11) / 4.0;
                if (c - x0).norm_squared() < s * s {
                    let xs = (q10 + q11 - q00 - q01) / (2.0 * ds);
                    let xt = (q01 + q11 - q00 - q10) / (2.0 * dt);
                    total += xs.cross(&xt).norm() * ds * dt;
                }
            }
        }
    }
    total
}

/// Quadrature error of the density series: twice the largest change of
/// `Θ` when cell membership is decided on 2×2 sub-cells instead of whole
/// cells. The factor two covers forward differences of two values.
pub fn density_quadrature_error(series: &DensitySeries, patch: &ParamPatch) -> f64 {
    series
        .radii
        .par_iter()
        .zip(&series.values)
        .map(|(&s, &v)| (refined_ball_area(patch, &series.center, s, 2) / (PI * s * s) - v).abs())
        .reduce(|| 0.0, f64::max)
        * 2.0
}

/// `s⁻² ∫_{B_s(x₀) ∩ Σ} f` for a non-negative subharmonic `f`.
pub fn weighted_mean_value(
    patch: &ParamPatch,
    x0: &Vec3,
    f: &[f64],
    radii: &[f64],
    tol: f64,
) -> Result<Vec<f64>, DensityError> {
    check_radii(radii)?;
    if f.len() != patch.len() {
        return Err(DensityError::ShapeMismatch {
            expected: patch.len(),
            got: f.len(),
        });
    }
    if f.iter().any(|v| *v < 0.0) {
        return Err(DensityError::NegativeWeight);
    }
    let min_laplacian = surface_laplacian(f, patch)?
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if min_laplacian < -tol {
        return Err(DensityError::NotSubharmonic { min_laplacian });
    }
    Ok(radii
        .par_iter()
        .map(|&s| integrate_field(patch, f, |c| (c - x0).norm_squared() < s * s) / (s * s))
        .collect())
}

/// How a sampled graph extends beyond its window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphExtent {
    /// Only the sampled window counts.
    Window,
    /// The graph is invariant under translation in `y`; the `y` integral of
    /// the Gaussian is done exactly and only the middle row is used.
    InvariantY,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianValue {
    pub value: f64,
    /// Gaussian mass of a plane through the center beyond the window,
    /// `exp(−d²/(4τ))` with `d` the distance to the window edge.
    pub truncation: f64,
}

impl GaussianValue {
    pub fn truncated(&self) -> bool {
        self.truncation > 1e-8
    }
}

/// `∫ (4πτ)⁻¹ e^{−|x − x₀|²/(4τ)}` over the graph of `u` by the nodal
/// trapezoid rule, `τ > 0` being the time left to the reference time.
pub fn graph_gaussian_density(u: &GraphFunction, x0: &Vec3, tau: f64, extent: GraphExtent) -> GaussianValue {
    let g = u.grid;
    let w = u.gradient_norms();
    let trap = |k: usize, n: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
    let edge_x = (x0.x - g.x0).min(g.x_max() - x0.x);
    match extent {
        GraphExtent::Window => {
            let mut total = 0.0;
            for i in 0..g.nx {
                for j in 0..g.ny {
                    let k = g.index(i, j);
                    let p = Vec3::new(g.x(i), g.y(j), u.u[k]);
                    let area = (1.0 + w[k] * w[k]).sqrt();
                    total += trap(i, g.nx) * trap(j, g.ny) * area * (-(p - x0).norm_squared() / (4.0 * tau)).exp();
                }
            }
            let d = edge_x.min(x0.y - g.y0).min(g.y_max() - x0.y).max(0.0);
            GaussianValue {
                value: total * g.dx * g.dy / (4.0 * PI * tau),
                truncation: (-d * d / (4.0 * tau)).exp(),
            }
        }
        GraphExtent::InvariantY => {
            let j = g.ny / 2;
            let mut total = 0.0;
            for i in 0..g.nx {
                let k = g.index(i, j);
                let dx = g.x(i) - x0.x;
                let dz = u.u[k] - x0.z;
                let len = (1.0 + w[k] * w[k]).sqrt();
                total += trap(i, g.nx) * len * (-(dx * dx + dz * dz) / (4.0 * tau)).exp();
            }
            let d = edge_x.max(0.0);
            GaussianValue {
                value: total * g.dx / (4.0 * PI * tau).sqrt(),
                truncation: (-d * d / (4.0 * tau)).exp(),
            }
        }
    }
}

/// Gaussian density of every trace frame for reference point `x₀` and
/// reference time `t₀` later than the whole trace.
pub fn gaussian_density_series(
    trace: &FlowTrace,
    x0: &Vec3,
    t0: f64,
    extent: GraphExtent,
) -> Vec<GaussianValue> {
    (0..trace.frames.len())
        .into_par_iter()
        .map(|k| {
            let u = trace.frame_function(k);
            graph_gaussian_density(&u, x0, t0 - u.t, extent)
        })
        .collect()
}

/// `min_i (v_i − v_{i+1})`: non-negative for a non-increasing series.
pub fn nonincreasing_defect(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min)
}

/// Gaussian density of a sampled surface, cell midpoint rule.
pub fn patch_gaussian_density(patch: &ParamPatch, x0: &Vec3, tau: f64) -> f64 {
    weighted_area(patch, |c| (-(c - x0).norm_squared() / (4.0 * tau)).exp()) / (4.0 * PI * tau)
}

/// Round sphere of radius `√(4τ)` about the origin, the self-similar
/// shrinker at time `τ` before extinction, sampled on an `n × 2n` grid.
pub fn shrinking_sphere_density(tau: f64, n: usize) -> Result<f64, DensityError> {
    let r = (4.0 * tau).sqrt();
    let patch = ParamPatch::from_fn((0.0, PI), (0.0, 2.0 * PI), n, 2 * n, true, |s, t| {
        Vec3::new(r * s.sin() * t.cos(), r * s.sin() * t.sin(), r * s.cos())
    })?;
    Ok(patch_gaussian_density(&patch, &Vec3::zeros(), tau))
}
