//! Discrete differential geometry on sampled parametric surfaces.
//!
//! A [`ParamPatch`] is a rectangular grid of points in R³. All derived
//! quantities use centered second-order differences at interior nodes:
//!
//! - fundamental forms and the unit normal ([`fundamental_forms`]),
//! - mean curvature `H = κ1 + κ2`, Gauss curvature and `|A|²`
//!   ([`curvature_scalars`]),
//! - the Laplace–Beltrami operator ([`surface_laplacian`]),
//! - midpoint-rule areas, optionally restricted to a region ([`patch_area`]),
//! - the two sides of the first variation of area ([`first_variation`]),
//! - the convex-hull containment check ([`convex_hull_check`]),
//! - the Simons identity residual for minimal patches ([`simons_residual`]).

mod area;
mod forms;
mod hull;
mod patch;
mod simons;

pub use area::{
    cell_midpoint, first_variation, integrate_field, patch_area, weighted_area, FirstVariation,
};
pub use forms::{
    christoffel, curvature_scalars, fundamental_forms, surface_laplacian, CurvatureField,
    FormField, NodeCurvature, NodeForms,
};
pub use hull::{convex_hull_check, Hull};
pub use patch::{Jet, ParamPatch, Vec3};
pub use simons::{simons_residual, SimonsReport, MINIMALITY_TOL};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("grid must have at least 5 nodes per axis, got {ns}x{nt}")]
    GridTooSmall { ns: usize, nt: usize },
    #[error("expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite sample")]
    NonFinite,
    #[error("tangents are parallel at node ({i}, {j})")]
    Degenerate { i: usize, j: usize },
    #[error("EG - F^2 <= 0 at node ({i}, {j})")]
    DegenerateMetric { i: usize, j: usize },
    #[error("normal offset with step {h} is no longer an immersion")]
    StepTooLarge { h: f64 },
    #[error("variation touches the two outer grid rings at ({i}, {j})")]
    SupportNotCompact { i: usize, j: usize },
    #[error("patch is not minimal: max |H| = {max_h:e}")]
    NotMinimal { max_h: f64 },
}

/// Exact parametrizations used throughout tests and the CLI.
pub mod surfaces {
    use super::{GeomError, ParamPatch, Vec3};
    use std::f64::consts::TAU;

    /// `(cosh s cos t, cosh s sin t, s)` for `|s| ≤ half_height`, `t` periodic.
    pub fn catenoid(half_height: f64, ns: usize, nt: usize) -> Result<ParamPatch, GeomError> {
        ParamPatch::from_fn((-half_height, half_height), (0.0, TAU), ns, nt, true, |s, t| {
            Vec3::new(s.cosh() * t.cos(), s.cosh() * t.sin(), s)
        })
    }

    /// `(s cos t, s sin t, t)` over `s_range × t_range`.
    pub fn helicoid(
        s_range: (f64, f64),
        t_range: (f64, f64),
        ns: usize,
        nt: usize,
    ) -> Result<ParamPatch, GeomError> {
        ParamPatch::from_fn(s_range, t_range, ns, nt, false, |s, t| {
            Vec3::new(s * t.cos(), s * t.sin(), t)
        })
    }

    /// Round sphere of radius `r` over polar angles `polar`, outward normal.
    pub fn sphere(r: f64, polar: (f64, f64), ns: usize, nt: usize) -> Result<ParamPatch, GeomError> {
        ParamPatch::from_fn(polar, (0.0, TAU), ns, nt, true, |s, t| {
            Vec3::new(r * s.sin() * t.cos(), r * s.sin() * t.sin(), r * s.cos())
        })
    }

    /// Square plane patch `[-half, half]²` in `{z = 0}`.
    pub fn plane(half: f64, n: usize) -> Result<ParamPatch, GeomError> {
        ParamPatch::from_fn((-half, half), (-half, half), n, n, false, |s, t| {
            Vec3::new(s, t, 0.0)
        })
    }
}
