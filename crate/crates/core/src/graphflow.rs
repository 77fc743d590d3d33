//! Graphs `x₃ = u(x₁, x₂)` over rectangles: the minimal surface equation,
//! a damped Newton Dirichlet solver, explicit mean curvature flow and the
//! Heinz and gradient-estimate reports.

use rayon::prelude::*;
use thiserror::Error;

use crate::geomcore::{curvature_scalars, fundamental_forms, GeomError, ParamPatch, Vec3};
use crate::monotonicity::{graph_gaussian_density, GraphExtent};
use crate::numerics::{rk4, BandedMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("grid must have at least 5 nodes per axis, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite sample")]
    NonFinite,
    #[error("Newton did not reach tolerance in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Newton system at unknown {0}")]
    SingularSystem(usize),
    #[error("time step {dt:e} exceeds the explicit limit {limit:e}")]
    StabilityViolation { dt: f64, limit: f64 },
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("not minimal: r0 · max|H| = {defect:e}")]
    NotMinimal { defect: f64 },
    #[error("t = {t} is past the extinction time {extinction}")]
    PastExtinction { t: f64, extinction: f64 },
    #[error("trace does not cover the required domain: {0}")]
    InsufficientDomain(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Uniform rectangular grid; node `(i, j)` sits at `(x0 + i dx, y0 + j dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub dx: f64,
    pub y0: f64,
    pub dy: f64,
}

impl Grid2 {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self, FlowError> {
        if nx < 5 || ny < 5 {
            return Err(FlowError::GridTooSmall { nx, ny });
        }
        Ok(Grid2 {
            nx,
            ny,
            x0: x_range.0,
            dx: (x_range.1 - x_range.0) / (nx - 1) as f64,
            y0: y_range.0,
            dy: (y_range.1 - y_range.0) / (ny - 1) as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    pub grid: Grid2,
    pub u: Vec<f64>,
    pub t: f64,
}

/// Centered first and second differences at an interior node.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    ux: f64,
    uy: f64,
    uxx: f64,
    uxy: f64,
    uyy: f64,
}

impl GraphFunction {
    pub fn new(grid: Grid2, u: Vec<f64>) -> Result<Self, FlowError> {
        if u.len() != grid.len() {
            return Err(FlowError::ShapeMismatch {
                expected: grid.len(),
                got: u.len(),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::NonFinite);
        }
        Ok(GraphFunction { grid, u, t: 0.0 })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid2, f: F) -> Result<Self, FlowError> {
        let mut u = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                u.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self::new(grid, u)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.index(i, j)]
    }

    fn stencil(&self, i: usize, j: usize) -> Stencil {
        let g = &self.grid;
        let u = |a: usize, b: usize| self.u[g.index(a, b)];
        let c = u(i, j);
        Stencil {
            ux: (u(i + 1, j) - u(i - 1, j)) / (2.0 * g.dx),
            uy: (u(i, j + 1) - u(i, j - 1)) / (2.0 * g.dy),
            uxx: (u(i + 1, j) - 2.0 * c + u(i - 1, j)) / (g.dx * g.dx),
            uyy: (u(i, j + 1) - 2.0 * c + u(i, j - 1)) / (g.dy * g.dy),
            uxy: (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1))
                / (4.0 * g.dx * g.dy),
        }
    }

    /// `|du|` at every node; second-order one-sided differences on edges.
    pub fn gradient_norms(&self) -> Vec<f64> {
        let g = self.grid;
        let d = |vals: [f64; 3], pos: usize, h: f64| match pos {
            0 => (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h),
            1 => (vals[2] - vals[0]) / (2.0 * h),
            _ => (3.0 * vals[2] - 4.0 * vals[1] + vals[0]) / (2.0 * h),
        };
        let mut out = Vec::with_capacity(g.len());
        for i in 0..g.nx {
            let (ix, px) = if i == 0 { (0, 0) } else if i + 1 == g.nx { (g.nx - 3, 2) } else { (i - 1, 1) };
            for j in 0..g.ny {
                let (jy, py) = if j == 0 { (0, 0) } else if j + 1 == g.ny { (g.ny - 3, 2) } else { (j - 1, 1) };
                let ux = d([self.at(ix, j), self.at(ix + 1, j), self.at(ix + 2, j)], px, g.dx);
                let uy = d([self.at(i, jy), self.at(i, jy + 1), self.at(i, jy + 2)], py, g.dy);
                out.push(ux.hypot(uy));
            }
        }
        out
    }

    /// The graph as a parametric patch over the same grid.
    pub fn lift(&self) -> Result<ParamPatch, GeomError> {
        let g = self.grid;
        let points = (0..g.nx)
            .flat_map(|i| (0..g.ny).map(move |j| (i, j)))
            .map(|(i, j)| Vec3::new(g.x(i), g.y(j), self.at(i, j)))
            .collect();
        ParamPatch::new(g.nx, g.ny, (g.x0, g.dx), (g.y0, g.dy), false, points)
    }

    pub fn sup_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation of nodal values at `(x, y)`.
    pub fn interpolate(&self, field: &[f64], x: f64, y: f64) -> f64 {
        let g = self.grid;
        let fx = ((x - g.x0) / g.dx).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((y - g.y0) / g.dy).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (a, b) = (fx - i as f64, fy - j as f64);
        let v = |p: usize, q: usize| field[g.index(p, q)];
        (1.0 - a) * (1.0 - b) * v(i, j)
            + a * (1.0 - b) * v(i + 1, j)
            + (1.0 - a) * b * v(i, j + 1)
            + a * b * v(i + 1, j + 1)
    }
}

fn quasilinear(s: &Stencil) -> f64 {
    (1.0 + s.uy * s.uy) * s.uxx - 2.0 * s.ux * s.uy * s.uxy + (1.0 + s.ux * s.ux) * s.uyy
}

/// `div(du/√(1+|du|²))` at interior nodes (NaN on the boundary), evaluated as
/// `((1+u_y²)u_xx − 2u_x u_y u_xy + (1+u_x²)u_yy)/W³`.
pub fn mse_residual(u: &GraphFunction) -> Vec<f64> {
    let g = u.grid;
    let mut out = vec![f64::NAN; g.len()];
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let s = u.stencil(i, j);
            let w = (1.0 + s.ux * s.ux + s.uy * s.uy).sqrt();
            out[g.index(i, j)] = quasilinear(&s) / (w * w * w);
        }
    }
    out
}

pub fn max_interior_abs(field: &[f64]) -> f64 {
    field
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// L2 norm of the `W³`-scaled residual before each accepted step and at
    /// the end.
    pub residual_history: Vec<f64>,
    pub max_residual: f64,
}

/// Interior unknowns numbered `(i−1)(ny−2) + (j−1)`.
fn unknown(g: &Grid2, i: usize, j: usize) -> usize {
    (i - 1) * (g.ny - 2) + (j - 1)
}

fn scaled_residual(u: &GraphFunction) -> Vec<f64> {
    let g = u.grid;
    let m = g.ny - 2;
    (1..g.nx - 1)
        .into_par_iter()
        .flat_map_iter(|i| (1..=m).map(move |j| quasilinear(&u.stencil(i, j))).collect::<Vec<_>>())
        .collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Harmonic function with the boundary values of `boundary`.
pub fn harmonic_extension(boundary: &GraphFunction) -> Result<GraphFunction, FlowError> {
    let g = boundary.grid;
    let n = (g.nx - 2) * (g.ny - 2);
    let mut a = BandedMatrix::zeros(n, g.ny - 1);
    let mut rhs = vec![0.0; n];
    let (cx, cy) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy));
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let r = unknown(&g, i, j);
            a.add(r, r, -2.0 * (cx + cy));
            for (p, q, c) in [(i - 1, j, cx), (i + 1, j, cx), (i, j - 1, cy), (i, j + 1, cy)] {
                if g.is_boundary(p, q) {
                    rhs[r] -= c * boundary.at(p, q);
                } else {
                    a.add(r, unknown(&g, p, q), c);
                }
            }
        }
    }
    a.solve(&mut rhs).map_err(|e| FlowError::SingularSystem(e.0))?;
    let mut out = boundary.clone();
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            out.u[g.index(i, j)] = rhs[unknown(&g, i, j)];
        }
    }
    Ok(out)
}

/// Solves the minimal surface equation with the boundary values of
/// `boundary` (its interior values are ignored).
pub fn solve_dirichlet(
    boundary: &GraphFunction,
    opts: NewtonOptions,
) -> Result<(GraphFunction, SolveStats), FlowError> {
    let g = boundary.grid;
    let mut u = harmonic_extension(boundary)?;
    let mut res = scaled_residual(&u);
    let mut norm = l2(&res);
    let mut history = vec![norm];
    for iter in 0..=opts.max_iter {
        let max_res = max_interior_abs(&mse_residual(&u));
        if max_res <= opts.tol {
            return Ok((
                u,
                SolveStats {
                    iterations: iter,
                    residual_history: history,
                    max_residual: max_res,
                },
            ));
        }
        if iter == opts.max_iter {
            return Err(FlowError::NoConvergence {
                iterations: iter,
                residual: max_res,
            });
        }
        let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
        jacobian(&u).solve(&mut delta).map_err(|e| FlowError::SingularSystem(e.0))?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for i in 1..g.nx - 1 {
                for j in 1..g.ny - 1 {
                    trial.u[g.index(i, j)] += step * delta[unknown(&g, i, j)];
                }
            }
            let trial_res = scaled_residual(&trial);
            let trial_norm = l2(&trial_res);
            if trial_norm < norm {
                u = trial;
                res = trial_res;
                norm = trial_norm;
                history.push(norm);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(FlowError::NoConvergence {
                iterations: iter,
                residual: max_res,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Jacobian of the `W³`-scaled residual with respect to interior values.
fn jacobian(u: &GraphFunction) -> BandedMatrix {
    let g = u.grid;
    let n = (g.nx - 2) * (g.ny - 2);
    let mut a = BandedMatrix::zeros(n, g.ny - 1);
    let (dx, dy) = (g.dx, g.dy);
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let s = u.stencil(i, j);
            let c_xx = 1.0 + s.uy * s.uy;
            let c_yy = 1.0 + s.ux * s.ux;
            let c_xy = -2.0 * s.ux * s.uy;
            let c_x = -2.0 * s.uy * s.uxy + 2.0 * s.ux * s.uyy;
            let c_y = 2.0 * s.uy * s.uxx - 2.0 * s.ux * s.uxy;
            let r = unknown(&g, i, j);
            let mut put = |p: usize, q: usize, v: f64| {
                if !g.is_boundary(p, q) {
                    a.add(r, unknown(&g, p, q), v);
                }
            };
            put(i, j, -2.0 * c_xx / (dx * dx) - 2.0 * c_yy / (dy * dy));
            put(i + 1, j, c_xx / (dx * dx) + c_x / (2.0 * dx));
            put(i - 1, j, c_xx / (dx * dx) - c_x / (2.0 * dx));
            put(i, j + 1, c_yy / (dy * dy) + c_y / (2.0 * dy));
            put(i, j - 1, c_yy / (dy * dy) - c_y / (2.0 * dy));
            let e = c_xy / (4.0 * dx * dy);
            put(i + 1, j + 1, e);
            put(i - 1, j - 1, e);
            put(i + 1, j - 1, -e);
            put(i - 1, j + 1, -e);
        }
    }
    a
}

/// `σ² · sup_{D_{r₀−σ}} |A|²` for a minimal graph, with the precondition
/// `r₀ · max_{D_{r₀}} |H| ≤ tol`.
pub fn heinz_report(
    u: &GraphFunction,
    center: (f64, f64),
    r0: f64,
    sigma: f64,
    tol: f64,
) -> Result<f64, FlowError> {
    let patch = u.lift()?;
    let curv = curvature_scalars(&fundamental_forms(&patch)?);
    let g = u.grid;
    let dist = |i: usize, j: usize| (g.x(i) - center.0).hypot(g.y(j) - center.1);
    let mut max_h: f64 = 0.0;
    let mut sup_a2: f64 = 0.0;
    for (i, j, c) in curv.iter() {
        let d = dist(i, j);
        if d <= r0 {
            max_h = max_h.max(c.h.abs());
        }
        if d <= r0 - sigma {
            sup_a2 = sup_a2.max(c.a2);
        }
    }
    if r0 * max_h > tol {
        return Err(FlowError::NotMinimal { defect: r0 * max_h });
    }
    Ok(sigma * sigma * sup_a2)
}

/// Boundary treatment during the flow.
pub enum BoundaryMode<'a> {
    Fixed,
    /// Boundary nodes follow `f(x, y, t)`.
    Prescribed(&'a (dyn Fn(f64, f64, f64) -> f64 + Sync)),
}

/// Huisken density probe `∫ (4π(t₀ − t))⁻¹ e^{−|x − x₀|²/(4(t₀ − t))}` recorded
/// along the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityProbe {
    pub center: Vec3,
    pub t0: f64,
    pub extent: GraphExtent,
}

pub struct FlowOptions<'a> {
    pub t_end: f64,
    /// Defaults to the stability limit `0.2 · min(Δx, Δy)²`.
    pub dt: Option<f64>,
    pub record_every: usize,
    pub boundary: BoundaryMode<'a>,
    /// Edges `y = const` copy their inner neighbours instead of following
    /// `boundary`; for data that do not depend on `y`.
    pub neumann_y: bool,
    pub density: Option<DensityProbe>,
}

impl<'a> FlowOptions<'a> {
    pub fn new(t_end: f64) -> Self {
        FlowOptions {
            t_end,
            dt: None,
            record_every: 1,
            boundary: BoundaryMode::Fixed,
            neumann_y: false,
            density: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFrame {
    pub t: f64,
    pub u: Vec<f64>,
    pub sup_du: f64,
    pub sup_a2: f64,
    pub gauss_density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub grid: Grid2,
    pub dt: f64,
    pub frames: Vec<TraceFrame>,
}

impl FlowTrace {
    pub fn last(&self) -> GraphFunction {
        let f = self.frames.last().expect("trace has a frame");
        GraphFunction {
            grid: self.grid,
            u: f.u.clone(),
            t: f.t,
        }
    }

    pub fn frame_function(&self, k: usize) -> GraphFunction {
        GraphFunction {
            grid: self.grid,
            u: self.frames[k].u.clone(),
            t: self.frames[k].t,
        }
    }
}

pub fn stability_limit(grid: &Grid2) -> f64 {
    0.2 * grid.dx.min(grid.dy).powi(2)
}

fn frame(u: &GraphFunction, probe: Option<&DensityProbe>) -> Result<TraceFrame, FlowError> {
    let patch = u.lift()?;
    let curv = curvature_scalars(&fundamental_forms(&patch)?);
    let sup_du = u.gradient_norms().into_iter().fold(0.0, f64::max);
    let gauss_density = probe.map(|p| graph_gaussian_density(u, &p.center, p.t0 - u.t, p.extent).value);
    Ok(TraceFrame {
        t: u.t,
        u: u.u.clone(),
        sup_du,
        sup_a2: curv.max_a2(),
        gauss_density,
    })
}

/// Forward-Euler graph mean curvature flow
/// `u_t = √(1+|du|²) div(du/√(1+|du|²))`.
pub fn mcf_flow(u0: &GraphFunction, opts: &FlowOptions) -> Result<FlowTrace, FlowError> {
    let g = u0.grid;
    let limit = stability_limit(&g);
    let dt_req = opts.dt.unwrap_or(limit);
    if !(dt_req > 0.0) || dt_req > limit * (1.0 + 1e-12) {
        return Err(FlowError::StabilityViolation { dt: dt_req, limit });
    }
    let steps = ((opts.t_end - u0.t) / dt_req - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { dt_req } else { (opts.t_end - u0.t) / steps as f64 };
    let every = opts.record_every.max(1);
    let mut u = u0.clone();
    let mut frames = vec![frame(&u, opts.density.as_ref())?];
    let t_start = u0.t;
    for step in 1..=steps {
        let t_new = t_start + step as f64 * dt;
        let cur = &u;
        let mut next: Vec<f64> = (0..g.nx)
            .into_par_iter()
            .flat_map_iter(|i| {
                (0..g.ny)
                    .map(|j| {
                        if g.is_boundary(i, j) {
                            match opts.boundary {
                                BoundaryMode::Fixed => cur.at(i, j),
                                BoundaryMode::Prescribed(f) => f(g.x(i), g.y(j), t_new),
                            }
                        } else {
                            let s = cur.stencil(i, j);
                            let w2 = 1.0 + s.ux * s.ux + s.uy * s.uy;
                            cur.at(i, j) + dt * quasilinear(&s) / w2
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if opts.neumann_y {
            for i in 1..g.nx - 1 {
                next[g.index(i, 0)] = next[g.index(i, 1)];
                next[g.index(i, g.ny - 1)] = next[g.index(i, g.ny - 2)];
            }
        }
        u.u = next;
        u.t = t_new;
        if u.u.iter().any(|v| !v.is_finite() || v.abs() > 1e6) {
            return Err(FlowError::BlowUp { t: t_new });
        }
        if step % every == 0 || step == steps {
            frames.push(frame(&u, opts.density.as_ref())?);
        }
    }
    Ok(FlowTrace { grid: g, dt, frames })
}

/// Closed-form radius `√(R² − 2nt)` of a shrinking round `n`-sphere and
/// an RK4 integration of `r' = −n/r` for comparison.
pub fn sphere_radius(r0: f64, n: f64, t: f64) -> Result<(f64, f64), FlowError> {
    let extinction = r0 * r0 / (2.0 * n);
    if t >= extinction || t < 0.0 {
        return Err(FlowError::PastExtinction { t, extinction });
    }
    let closed = (r0 * r0 - 2.0 * n * t).sqrt();
    let ode = rk4(|_, r| -n / r, r0, 0.0, t, 20_000);
    Ok((closed, ode))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientReport {
    /// `log |du|(x₀, r²/(4n))`, or `-1e9` when the gradient vanishes.
    pub left: f64,
    /// `C (1 + r⁻¹ sup_{B_{√(2n+1) r}(x₀)} |u(·, 0)|)²`
    pub right: f64,
    pub zero_gradient: bool,
    pub time: f64,
}

pub const LOG_ZERO_SENTINEL: f64 = -1e9;

/// Both sides of the sharp gradient estimate for graphs flowing by mean
/// curvature, evaluated on a recorded trace.
pub fn gradient_estimate_report(
    trace: &FlowTrace,
    x0: (f64, f64),
    r: f64,
    n: usize,
    c: f64,
) -> Result<GradientReport, FlowError> {
    let g = trace.grid;
    let radius = ((2 * n + 1) as f64).sqrt() * r;
    if x0.0 - radius < g.x0 - 1e-12
        || x0.0 + radius > g.x_max() + 1e-12
        || x0.1 - radius < g.y0 - 1e-12
        || x0.1 + radius > g.y_max() + 1e-12
    {
        return Err(FlowError::InsufficientDomain(format!(
            "ball of radius {radius} around {x0:?} leaves the grid"
        )));
    }
    let target = trace.frames[0].t + r * r / (4.0 * n as f64);
    let (k, frame) = trace
        .frames
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.t - target).abs().total_cmp(&(b.1.t - target).abs()))
        .expect("trace has frames");
    if (frame.t - target).abs() > trace.dt * (1.0 + 1e-9) {
        return Err(FlowError::InsufficientDomain(format!(
            "no frame near t = {target}"
        )));
    }
    let at_t = trace.frame_function(k);
    let du = at_t.interpolate(&at_t.gradient_norms(), x0.0, x0.1);
    let initial = trace.frame_function(0);
    let mut sup0: f64 = 0.0;
    for i in 0..g.nx {
        for j in 0..g.ny {
            if (g.x(i) - x0.0).hypot(g.y(j) - x0.1) <= radius {
                sup0 = sup0.max(initial.at(i, j).abs());
            }
        }
    }
    let zero_gradient = !(du > 0.0);
    Ok(GradientReport {
        left: if zero_gradient { LOG_ZERO_SENTINEL } else { du.ln() },
        right: c * (1.0 + sup0 / r).powi(2),
        zero_gradient,
        time: frame.t,
    })
}

/// Grim reaper `u = t − log cos x`, extended constantly in `y`.
pub fn grim_reaper_exact(x: f64, t: f64) -> f64 {
    t - x.cos().ln()
}

/// Grid `[−a, a] × [−2dx, 2dx]` with spacing `dx` in both directions.
pub fn grim_reaper_grid(half_width: f64, dx: f64) -> Result<Grid2, FlowError> {
    let nx = (2.0 * half_width / dx).round() as usize + 1;
    Grid2::new((-half_width, half_width), (-2.0 * dx, 2.0 * dx), nx, 5)
}

/// L∞ error at `t_end` of the flowed grim reaper on `|x| ≤ half_width`, with
/// `Δt = 0.2 Δx²`, exact values at `x = ±half_width` and zero flux across
/// the `y` edges.
pub fn grim_reaper_error(half_width: f64, dx: f64, t_end: f64) -> Result<f64, FlowError> {
    let grid = grim_reaper_grid(half_width, dx)?;
    let u0 = GraphFunction::from_fn(grid, |x, _| grim_reaper_exact(x, 0.0))?;
    let exact = |x: f64, _y: f64, t: f64| grim_reaper_exact(x, t);
    let mut opts = FlowOptions::new(t_end);
    opts.record_every = usize::MAX;
    opts.boundary = BoundaryMode::Prescribed(&exact);
    opts.neumann_y = true;
    let trace = mcf_flow(&u0, &opts)?;
    let last = trace.last();
    Ok((0..grid.nx)
        .flat_map(|i| (0..grid.ny).map(move |j| (i, j)))
        .map(|(i, j)| (last.at(i, j) - grim_reaper_exact(grid.x(i), last.t)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square(n: usize) -> Grid2 {
        Grid2::new((-1.0, 1.0), (-1.0, 1.0), n, n).unwrap()
    }

    #[test]
    fn affine_residual_vanishes() {
        let u = GraphFunction::from_fn(square(9), |x, y| 1.0 + 2.0 * x - y).unwrap();
        assert_eq!(max_interior_abs(&mse_residual(&u)), 0.0);
    }

    #[test]
    fn parabola_residual_matches_symbolic() {
        let run = |n: usize| {
            let u = GraphFunction::from_fn(square(n), |x, _| x * x).unwrap();
            let res = mse_residual(&u);
            let g = u.grid;
            let mut err: f64 = 0.0;
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    let x = g.x(i);
                    let exact = 2.0 / (1.0 + 4.0 * x * x).powf(1.5);
                    err = err.max((res[g.index(i, j)] - exact).abs());
                }
            }
            err
        };
        // both difference quotients are exact on quadratics
        assert!(run(33) < 1e-12);
    }

    fn catenoid_graph(grid: Grid2, s: f64, c: (f64, f64)) -> GraphFunction {
        GraphFunction::from_fn(grid, |x, y| s * ((x - c.0).hypot(y - c.1) / s).acosh()).unwrap()
    }

    #[test]
    fn catenoid_graph_residual_is_second_order() {
        let run = |n: usize| {
            let grid = Grid2::new((1.2, 2.2), (-0.5, 0.5), n, n).unwrap();
            max_interior_abs(&mse_residual(&catenoid_graph(grid, 1.0, (0.0, 0.0))))
        };
        let ratio = run(33) / run(65);
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn affine_data_solves_exactly() {
        let b = GraphFunction::from_fn(square(17), |x, y| 0.5 - x + 3.0 * y).unwrap();
        let (u, stats) = solve_dirichlet(&b, NewtonOptions::default()).unwrap();
        assert!(stats.max_residual <= 1e-10);
        for (a, e) in u.u.iter().zip(&b.u) {
            assert_abs_diff_eq!(a, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn catenoid_trace_data_recovers_profile() {
        let grid = Grid2::new((1.2, 2.2), (-0.5, 0.5), 128, 128).unwrap();
        let exact = catenoid_graph(grid, 1.0, (0.0, 0.0));
        let mut b = exact.clone();
        for i in 1..grid.nx - 1 {
            for j in 1..grid.ny - 1 {
                b.u[grid.index(i, j)] = 0.0;
            }
        }
        let (u, stats) = solve_dirichlet(&b, NewtonOptions::default()).unwrap();
        let err = u.u.iter().zip(&exact.u).fold(0.0f64, |m, (a, e)| m.max((a - e).abs()));
        assert!(err <= 1e-4, "err {err}");
        for w in stats.residual_history.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn ordered_boundary_data_give_ordered_solutions() {
        let grid = square(25);
        let b1 = GraphFunction::from_fn(grid, |x, y| 0.3 * (3.0 * x).sin() + 0.2 * y * y).unwrap();
        let b2 = GraphFunction::from_fn(grid, |x, y| 0.3 * (3.0 * x).sin() + 0.2 * y * y + 0.1 * (1.0 + x)).unwrap();
        let (u1, _) = solve_dirichlet(&b1, NewtonOptions::default()).unwrap();
        let (u2, _) = solve_dirichlet(&b2, NewtonOptions::default()).unwrap();
        for (a, b) in u1.u.iter().zip(&u2.u) {
            assert!(*a <= b + 1e-10);
        }
    }

    #[test]
    fn steep_data_reports_no_convergence() {
        let b = GraphFunction::from_fn(square(17), |x, _| if x > 0.0 { 50.0 } else { -50.0 }).unwrap();
        let opts = NewtonOptions {
            max_iter: 3,
            ..NewtonOptions::default()
        };
        assert!(matches!(
            solve_dirichlet(&b, opts),
            Err(FlowError::NoConvergence { .. })
        ));
    }

    #[test]
    fn heinz_quantity_is_scale_invariant() {
        let vals: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&s| {
                let c = (3.0 * s, 0.0);
                let grid = Grid2::new((1.5 * s, 4.5 * s), (-1.5 * s, 1.5 * s), 129, 129).unwrap();
                let u = catenoid_graph(grid, s, (0.0, 0.0));
                heinz_report(&u, c, 1.5 * s, 0.5 * s, 1e-2).unwrap()
            })
            .collect();
        assert!(vals[0] > 0.0);
        for v in &vals {
            assert_abs_diff_eq!(*v, vals[0], epsilon = 1e-12 * vals[0]);
        }
        let plane = GraphFunction::from_fn(square(17), |x, y| x + y).unwrap();
        assert_eq!(heinz_report(&plane, (0.0, 0.0), 0.9, 0.3, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn heinz_rejects_spherical_cap() {
        let u = GraphFunction::from_fn(square(33), |x, y| (4.0 - x * x - y * y).sqrt()).unwrap();
        assert!(matches!(
            heinz_report(&u, (0.0, 0.0), 0.9, 0.3, 1e-3),
            Err(FlowError::NotMinimal { .. })
        ));
    }

    #[test]
    fn constant_data_stay_constant() {
        let u0 = GraphFunction::from_fn(square(11), |_, _| 2.5).unwrap();
        let trace = mcf_flow(&u0, &FlowOptions::new(0.05)).unwrap();
        assert!(trace.frames.iter().all(|f| f.u.iter().all(|&v| v == 2.5)));
        assert!(trace.frames.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn unstable_step_is_rejected() {
        let u0 = GraphFunction::from_fn(square(11), |_, _| 0.0).unwrap();
        let mut opts = FlowOptions::new(0.1);
        opts.dt = Some(0.01);
        assert!(matches!(
            mcf_flow(&u0, &opts),
            Err(FlowError::StabilityViolation { .. })
        ));
    }

    #[test]
    fn grim_reaper_converges_at_second_order() {
        let e1 = grim_reaper_error(1.375, 1.0 / 16.0, 0.1).unwrap();
        let e2 = grim_reaper_error(1.375, 1.0 / 32.0, 0.1).unwrap();
        assert!((3.0..=5.0).contains(&(e1 / e2)), "{e1} {e2}");
    }

    #[test]
    fn ordered_flows_stay_ordered() {
        let grid = square(21);
        let f = |x: f64, y: f64| 0.4 * (-(x * x + y * y) * 4.0).exp();
        let u0 = GraphFunction::from_fn(grid, f).unwrap();
        let v0 = GraphFunction::from_fn(grid, |x, y| f(x, y) + 0.05 + 0.02 * x).unwrap();
        let a = mcf_flow(&u0, &FlowOptions::new(0.05)).unwrap();
        let b = mcf_flow(&v0, &FlowOptions::new(0.05)).unwrap();
        let mut gap = f64::INFINITY;
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            for (x, y) in fa.u.iter().zip(&fb.u) {
                gap = gap.min(y - x);
            }
        }
        assert!(gap >= -1e-12);
    }

    #[test]
    fn minimal_graph_is_a_fixed_point() {
        let grid = Grid2::new((1.2, 2.2), (-0.5, 0.5), 33, 33).unwrap();
        let mut b = catenoid_graph(grid, 1.0, (0.0, 0.0));
        for i in 1..grid.nx - 1 {
            for j in 1..grid.ny - 1 {
                b.u[grid.index(i, j)] = 0.0;
            }
        }
        let (u, _) = solve_dirichlet(&b, NewtonOptions::default()).unwrap();
        let trace = mcf_flow(&u, &FlowOptions::new(0.01)).unwrap();
        let drift = trace.last().u.iter().zip(&u.u).fold(0.0f64, |m, (a, e)| m.max((a - e).abs()));
        assert!(drift <= 1e-10, "drift {drift}");
    }

    #[test]
    fn shrinking_sphere_radius() {
        assert_eq!(sphere_radius(1.0, 2.0, 0.0).unwrap().0, 1.0);
        let (c, o) = sphere_radius(2.0, 3.0, 0.5).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o, 1.0, epsilon = 1e-10);
        assert!(matches!(
            sphere_radius(1.0, 2.0, 0.25),
            Err(FlowError::PastExtinction { .. })
        ));
        let (c, o) = sphere_radius(1.0, 2.0, 0.99 * 0.25).unwrap();
        assert_abs_diff_eq!(c, o, epsilon = 1e-10);
    }

    #[test]
    fn flat_data_hit_the_log_sentinel() {
        let u0 = GraphFunction::from_fn(square(21), |_, _| 0.0).unwrap();
        let trace = mcf_flow(&u0, &FlowOptions::new(0.02)).unwrap();
        let rep = gradient_estimate_report(&trace, (0.0, 0.0), 0.2, 2, 1.0).unwrap();
        assert!(rep.zero_gradient);
        assert_eq!(rep.left, LOG_ZERO_SENTINEL);
        assert!(rep.left < rep.right);
    }

    #[test]
    fn gradient_report_needs_the_ball() {
        let u0 = GraphFunction::from_fn(square(21), |_, _| 0.0).unwrap();
        let trace = mcf_flow(&u0, &FlowOptions::new(0.02)).unwrap();
        assert!(matches!(
            gradient_estimate_report(&trace, (0.9, 0.0), 0.2, 2, 1.0),
            Err(FlowError::InsufficientDomain(_))
        ));
    }
}
