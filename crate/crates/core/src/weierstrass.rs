//! Minimal immersions from holomorphic data through
//! `F(z) = Re ∫_{z₀}^{z} (½(g⁻¹ − g), (i/2)(g⁻¹ + g), 1) φ`.
//!
//! Paths are polylines, integrated with composite Gauss–Legendre. Grids are
//! laid out in a chart `w = s + it`: `z = w` on rectangles and `z = e^w` on
//! annuli, both conformal, so the resulting patches are conformal too.

use std::f64::consts::TAU;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geomcore::{GeomError, ParamPatch, Vec3};
use crate::numerics::gauss_legendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeierstrassError {
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("path leaves the domain near {0}")]
    PathOutsideDomain(Complex64),
    #[error("g or φ is singular near {0}")]
    SingularityOnPath(Complex64),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Closed vocabulary of holomorphic evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComplexFn {
    /// `Σ c_k z^{p_k}`
    Laurent { terms: Vec<(i32, Complex64)> },
    /// `scale · e^{rate z}`
    Exp { scale: Complex64, rate: Complex64 },
    Sum { parts: Vec<ComplexFn> },
    Product { parts: Vec<ComplexFn> },
    Reciprocal { inner: Box<ComplexFn> },
}

impl ComplexFn {
    pub fn constant(c: Complex64) -> Self {
        ComplexFn::Laurent { terms: vec![(0, c)] }
    }

    pub fn monomial(power: i32, c: Complex64) -> Self {
        ComplexFn::Laurent {
            terms: vec![(power, c)],
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            ComplexFn::Laurent { terms } => terms.iter().map(|&(p, c)| c * z.powi(p)).sum(),
            ComplexFn::Exp { scale, rate } => scale * (rate * z).exp(),
            ComplexFn::Sum { parts } => parts.iter().map(|f| f.eval(z)).sum(),
            ComplexFn::Product { parts } => parts.iter().map(|f| f.eval(z)).product(),
            ComplexFn::Reciprocal { inner } => inner.eval(z).inv(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Annulus { r_in: f64, r_out: f64 },
    Rectangle { re: (f64, f64), im: (f64, f64) },
}

impl Domain {
    pub fn contains(&self, z: Complex64) -> bool {
        let tol = 1e-12;
        match *self {
            Domain::Annulus { r_in, r_out } => {
                let r = z.norm();
                r >= r_in * (1.0 - tol) && r <= r_out * (1.0 + tol)
            }
            Domain::Rectangle { re, im } => {
                let pad = tol * (1.0 + re.0.abs() + re.1.abs() + im.0.abs() + im.1.abs());
                z.re >= re.0 - pad && z.re <= re.1 + pad && z.im >= im.0 - pad && z.im <= im.1 + pad
            }
        }
    }

    /// Chart rectangle `(s range, t range)` covering the domain.
    pub fn chart_box(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            Domain::Annulus { r_in, r_out } => ((r_in.ln(), r_out.ln()), (0.0, TAU)),
            Domain::Rectangle { re, im } => (re, im),
        }
    }

    pub fn periodic(&self) -> bool {
        matches!(self, Domain::Annulus { .. })
    }

    pub fn from_chart(&self, w: Complex64) -> Complex64 {
        match self {
            Domain::Annulus { .. } => w.exp(),
            Domain::Rectangle { .. } => w,
        }
    }

    pub fn chart_derivative(&self, w: Complex64) -> Complex64 {
        match self {
            Domain::Annulus { .. } => w.exp(),
            Domain::Rectangle { .. } => Complex64::new(1.0, 0.0),
        }
    }

    pub fn to_chart(&self, z: Complex64) -> Complex64 {
        match self {
            Domain::Annulus { .. } => Complex64::new(z.norm().ln(), z.arg()),
            Domain::Rectangle { .. } => z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassData {
    pub domain: Domain,
    pub g: ComplexFn,
    pub phi: ComplexFn,
    pub base: Complex64,
}

/// Quadrature settings: `points`-node rule, at least `per_unit` pieces per
/// unit length of every segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub points: usize,
    pub per_unit: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            points: 8,
            per_unit: 8.0,
        }
    }
}

pub const PRESETS: [&str; 3] = ["catenoid", "helicoid", "enneper"];

/// Grid rotation used for refinement studies.
pub const REFINEMENT_ANGLE: f64 = 0.2;

pub fn preset_data(name: &str) -> Result<WeierstrassData, WeierstrassError> {
    let one = Complex64::new(1.0, 0.0);
    match name {
        "catenoid" => Ok(WeierstrassData {
            domain: Domain::Annulus {
                r_in: 0.5,
                r_out: 2.0,
            },
            g: ComplexFn::monomial(1, one),
            phi: ComplexFn::monomial(-1, one),
            base: one,
        }),
        "helicoid" => Ok(WeierstrassData {
            domain: Domain::Rectangle {
                re: (0.0, TAU),
                im: (-1.0, 1.0),
            },
            g: ComplexFn::Exp {
                scale: one,
                rate: Complex64::i(),
            },
            phi: ComplexFn::constant(one),
            base: Complex64::new(0.0, 0.0),
        }),
        // a square around z = i, away from the zero of g
        "enneper" => Ok(WeierstrassData {
            domain: Domain::Rectangle {
                re: (-0.5, 0.5),
                im: (0.5, 1.5),
            },
            g: ComplexFn::monomial(1, one),
            phi: ComplexFn::constant(one),
            base: Complex64::i(),
        }),
        other => Err(WeierstrassError::UnknownPreset(other.to_string())),
    }
}

impl WeierstrassData {
    /// The three component densities at `z`, guarded against singular data.
    pub fn integrand(&self, z: Complex64) -> Result<[Complex64; 3], WeierstrassError> {
        let g = self.g.eval(z);
        let phi = self.phi.eval(z);
        let gn = g.norm();
        if !(1e-8..=1e8).contains(&gn) || !phi.is_finite() || phi.norm() > 1e8 {
            return Err(WeierstrassError::SingularityOnPath(z));
        }
        let gi = g.inv();
        let i = Complex64::i();
        Ok([0.5 * (gi - g) * phi, 0.5 * i * (gi + g) * phi, phi])
    }

    /// Checks the invariants on an `n × n` chart sample of the domain.
    pub fn validate(&self, n: usize) -> Result<(), WeierstrassError> {
        if !self.domain.contains(self.base) {
            return Err(WeierstrassError::InvalidData(
                "base point outside the domain".into(),
            ));
        }
        let ((s0, s1), (t0, t1)) = self.domain.chart_box();
        for a in 0..n {
            for b in 0..n {
                let s = s0 + (s1 - s0) * a as f64 / (n - 1) as f64;
                let t = t0 + (t1 - t0) * b as f64 / (n - 1) as f64;
                self.integrand(self.domain.from_chart(Complex64::new(s, t)))?;
            }
        }
        Ok(())
    }

    /// Complex integral of the component forms along a z-plane segment.
    fn segment(&self, a: Complex64, b: Complex64, q: Quadrature) -> Result<[Complex64; 3], WeierstrassError> {
        let pieces = ((b - a).norm() * q.per_unit).ceil().max(1.0) as usize;
        let rule = gauss_legendre(q.points);
        let h = (b - a) / pieces as f64;
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for k in 0..pieces {
            let mid = a + h * (k as f64 + 0.5);
            for &(x, w) in &rule {
                let z = mid + h * (0.5 * x);
                if !self.domain.contains(z) {
                    return Err(WeierstrassError::PathOutsideDomain(z));
                }
                let f = self.integrand(z)?;
                for c in 0..3 {
                    acc[c] += f[c] * (0.5 * w) * h;
                }
            }
        }
        Ok(acc)
    }

    /// Same integral along a chart segment, `dz = z'(w) dw`.
    fn chart_segment(
        &self,
        a: Complex64,
        b: Complex64,
        q: Quadrature,
    ) -> Result<[Complex64; 3], WeierstrassError> {
        let pieces = ((b - a).norm() * q.per_unit).ceil().max(1.0) as usize;
        let rule = gauss_legendre(q.points);
        let h = (b - a) / pieces as f64;
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for k in 0..pieces {
            let mid = a + h * (k as f64 + 0.5);
            for &(x, w) in &rule {
                let wz = mid + h * (0.5 * x);
                let z = self.domain.from_chart(wz);
                if !self.domain.contains(z) {
                    return Err(WeierstrassError::PathOutsideDomain(z));
                }
                let f = self.integrand(z)?;
                let dz = self.domain.chart_derivative(wz) * h * (0.5 * w);
                for c in 0..3 {
                    acc[c] += f[c] * dz;
                }
            }
        }
        Ok(acc)
    }

    /// `Re ∫` of the component forms along a z-plane polyline.
    pub fn integrate_path(&self, path: &[Complex64], q: Quadrature) -> Result<Vec3, WeierstrassError> {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for pair in path.windows(2) {
            let part = self.segment(pair[0], pair[1], q)?;
            for c in 0..3 {
                acc[c] += part[c];
            }
        }
        Ok(Vec3::new(acc[0].re, acc[1].re, acc[2].re))
    }

    /// `F(z)` along the polyline `base → waypoints… → z`.
    pub fn integrate_immersion(
        &self,
        z: Complex64,
        waypoints: &[Complex64],
        q: Quadrature,
    ) -> Result<Vec3, WeierstrassError> {
        let mut path = Vec::with_capacity(waypoints.len() + 2);
        path.push(self.base);
        path.extend_from_slice(waypoints);
        path.push(z);
        self.integrate_path(&path, q)
    }

    /// Largest `|Re ∮|` over closed polylines.
    pub fn period_defect(&self, loops: &[Vec<Complex64>], q: Quadrature) -> Result<f64, WeierstrassError> {
        let mut worst: f64 = 0.0;
        for lp in loops {
            let mut closed = lp.clone();
            if closed.first() != closed.last() {
                closed.push(closed[0]);
            }
            worst = worst.max(self.integrate_path(&closed, q)?.norm());
        }
        Ok(worst)
    }

    /// Samples `F` on an `ns × nt` chart grid covering the domain.
    pub fn make_patch(&self, ns: usize, nt: usize, q: Quadrature) -> Result<ParamPatch, WeierstrassError> {
        self.make_patch_on(&ChartGrid::covering(&self.domain, ns, nt), q)
    }

    /// Samples `F` on a chart grid. Values are accumulated cell by cell
    /// along the first column and then along each row.
    pub fn make_patch_on(&self, grid: &ChartGrid, q: Quadrature) -> Result<ParamPatch, WeierstrassError> {
        let (ns, nt) = (grid.ns, grid.nt);
        if ns < 5 || nt < 5 {
            return Err(GeomError::GridTooSmall { ns, nt }.into());
        }
        let (ds, dt) = grid.steps();
        let w = |i: usize, j: usize| grid.node(i, j);
        let add = |a: [Complex64; 3], b: [Complex64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];

        let wb = self.domain.to_chart(self.base);
        let mut column = Vec::with_capacity(ns);
        let mut acc = self.chart_segment(wb, w(0, 0), q)?;
        column.push(acc);
        for i in 1..ns {
            acc = add(acc, self.chart_segment(w(i - 1, 0), w(i, 0), q)?);
            column.push(acc);
        }
        let rows: Vec<Vec<Vec3>> = (0..ns)
            .into_par_iter()
            .map(|i| {
                let mut acc = column[i];
                let mut row = Vec::with_capacity(nt);
                row.push(Vec3::new(acc[0].re, acc[1].re, acc[2].re));
                for j in 1..nt {
                    acc = add(acc, self.chart_segment(w(i, j - 1), w(i, j), q)?);
                    row.push(Vec3::new(acc[0].re, acc[1].re, acc[2].re));
                }
                Ok(row)
            })
            .collect::<Result<_, WeierstrassError>>()?;
        let points = rows.into_iter().flatten().collect();
        Ok(ParamPatch::new(
            ns,
            nt,
            (0.0, ds),
            (0.0, dt),
            grid.periodic,
            points,
        )?)
    }
}

/// Tensor grid in the chart: node `(i, j)` sits at
/// `origin + e^{iβ}(i·ds + i·j·dt)`, a conformal image of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartGrid {
    pub origin: Complex64,
    pub s_len: f64,
    pub t_len: f64,
    pub angle: f64,
    pub ns: usize,
    pub nt: usize,
    /// `t` wraps with period `t_len` (annulus charts only).
    pub periodic: bool,
}

impl ChartGrid {
    pub fn covering(domain: &Domain, ns: usize, nt: usize) -> Self {
        let ((s0, s1), (t0, t1)) = domain.chart_box();
        ChartGrid {
            origin: Complex64::new(s0, t0),
            s_len: s1 - s0,
            t_len: t1 - t0,
            angle: 0.0,
            ns,
            nt,
            periodic: domain.periodic(),
        }
    }

    /// Largest square of the chart box rotated by `angle`, centered in it,
    /// with `n × n` nodes. Square cells keep the discretization error
    /// isotropic; a nonzero angle keeps grid lines off symmetry directions.
    pub fn inscribed_square(domain: &Domain, n: usize, angle: f64) -> Self {
        let ((s0, s1), (t0, t1)) = domain.chart_box();
        let side = (s1 - s0).min(t1 - t0) / (angle.cos().abs() + angle.sin().abs());
        let center = Complex64::new(0.5 * (s0 + s1), 0.5 * (t0 + t1));
        ChartGrid {
            origin: center - Complex64::from_polar(1.0, angle) * Complex64::new(0.5 * side, 0.5 * side),
            s_len: side,
            t_len: side,
            angle,
            ns: n,
            nt: n,
            periodic: false,
        }
    }

    pub fn steps(&self) -> (f64, f64) {
        let ds = self.s_len / (self.ns.max(2) - 1) as f64;
        let dt = if self.periodic {
            self.t_len / self.nt.max(1) as f64
        } else {
            self.t_len / (self.nt.max(2) - 1) as f64
        };
        (ds, dt)
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let (ds, dt) = self.steps();
        self.origin + Complex64::from_polar(1.0, self.angle) * Complex64::new(i as f64 * ds, j as f64 * dt)
    }
}

/// Closed polygon with `m` vertices on the circle `|z| = r`.
pub fn circle_loop(r: f64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(r, TAU * k as f64 / m as f64))
        .collect()
}

/// `max(| |F_s| − |F_t| |, |F_s · F_t|)` over interior nodes.
pub fn conformality_defect(patch: &ParamPatch) -> f64 {
    patch
        .interior_nodes()
        .map(|(i, j)| {
            let jet = patch.jet(i, j);
            (jet.xs.norm() - jet.xt.norm())
                .abs()
                .max(jet.xs.dot(&jet.xt).abs())
        })
        .fold(0.0, f64::max)
}

/// Largest pointwise distance between `a` and the best rigid motion of `b`
/// onto it (centroid alignment plus orthogonal Procrustes).
pub fn rigid_fit_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ca = a.iter().fold(Vec3::zeros(), |s, p| s + p) / n;
    let cb = b.iter().fold(Vec3::zeros(), |s, p| s + p) / n;
    let mut cov = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        cov += (q - cb) * (p - ca).transpose();
    }
    let svd = cov.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if (vt.transpose() * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rot = vt.transpose() * d * u.transpose();
    a.iter()
        .zip(b)
        .map(|(p, q)| ((p - ca) - rot * (q - cb)).norm())
        .fold(0.0, f64::max)
}
