use nalgebra::Vector3;

use super::GeomError;

pub type Vec3 = Vector3<f64>;

/// A sampled immersion of a rectangular parameter grid into R³.
///
/// Nodes are stored row-major: `index = i * nt + j` with `i` along `s` and
/// `j` along `t`. When `periodic_t` is set the `t` direction wraps and the
/// seam node is not duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPatch {
    ns: usize,
    nt: usize,
    s0: f64,
    ds: f64,
    t0: f64,
    dt: f64,
    periodic_t: bool,
    points: Vec<Vec3>,
}

/// Finite-difference tangent data at one node.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub xs: Vec3,
    pub xt: Vec3,
    pub xss: Vec3,
    pub xst: Vec3,
    pub xtt: Vec3,
}

impl ParamPatch {
    /// Validating constructor.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ns: usize,
        nt: usize,
        (s0, ds): (f64, f64),
        (t0, dt): (f64, f64),
        periodic_t: bool,
        points: Vec<Vec3>,
    ) -> Result<Self, GeomError> {
        if ns < 5 || nt < 5 {
            return Err(GeomError::GridTooSmall { ns, nt });
        }
        if points.len() != ns * nt {
            return Err(GeomError::ShapeMismatch {
                expected: ns * nt,
                got: points.len(),
            });
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeomError::NonFinite);
        }
        let patch = ParamPatch {
            ns,
            nt,
            s0,
            ds,
            t0,
            dt,
            periodic_t,
            points,
        };
        for (i, j) in patch.interior_nodes() {
            let jet = patch.jet(i, j);
            if jet.xs.cross(&jet.xt).norm() <= 0.0 {
                return Err(GeomError::Degenerate { i, j });
            }
        }
        Ok(patch)
    }

    /// Sample `f` on `[s_range] × [t_range]`. For a periodic patch `t_range`
    /// is one full period and the end point is not sampled.
    pub fn from_fn<F>(
        s_range: (f64, f64),
        t_range: (f64, f64),
        ns: usize,
        nt: usize,
        periodic_t: bool,
        f: F,
    ) -> Result<Self, GeomError>
    where
        F: Fn(f64, f64) -> Vec3,
    {
        let ds = (s_range.1 - s_range.0) / (ns.max(2) - 1) as f64;
        let dt = if periodic_t {
            (t_range.1 - t_range.0) / nt.max(1) as f64
        } else {
            (t_range.1 - t_range.0) / (nt.max(2) - 1) as f64
        };
        let mut points = Vec::with_capacity(ns * nt);
        for i in 0..ns {
            let s = s_range.0 + i as f64 * ds;
            for j in 0..nt {
                let t = t_range.0 + j as f64 * dt;
                points.push(f(s, t));
            }
        }
        Self::new(ns, nt, (s_range.0, ds), (t_range.0, dt), periodic_t, points)
    }

    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn ds(&self) -> f64 {
        self.ds
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn s0(&self) -> f64 {
        self.s0
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn periodic_t(&self) -> bool {
        self.periodic_t
    }
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn param(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.s0 + i as f64 * self.ds,
            self.t0 + j as f64 * self.dt,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        self.points[i * self.nt + j]
    }

    /// Column index `j + dj`, wrapping when periodic. `None` off the grid.
    #[inline]
    pub fn shift_t(&self, j: usize, dj: isize) -> Option<usize> {
        let k = j as isize + dj;
        if self.periodic_t {
            Some(k.rem_euclid(self.nt as isize) as usize)
        } else if k < 0 || k >= self.nt as isize {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Nodes that carry a full centered 3×3 stencil.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i >= 1 && i + 1 < self.ns && (self.periodic_t || (j >= 1 && j + 1 < self.nt))
    }

    /// Nodes whose stencil is at least `ring` nodes away from the grid edge.
    pub fn in_ring(&self, i: usize, j: usize, ring: usize) -> bool {
        i >= ring && i + ring < self.ns && (self.periodic_t || (j >= ring && j + ring < self.nt))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (jlo, jhi) = if self.periodic_t {
            (0, self.nt)
        } else {
            (1, self.nt - 1)
        };
        (1..self.ns - 1).flat_map(move |i| (jlo..jhi).map(move |j| (i, j)))
    }

    /// Centered second-order derivatives at an interior node.
    pub fn jet(&self, i: usize, j: usize) -> Jet {
        let jp = self.shift_t(j, 1).expect("interior node");
        let jm = self.shift_t(j, -1).expect("interior node");
        let p = |a: usize, b: usize| self.points[a * self.nt + b];
        let c = p(i, j);
        let (ds, dt) = (self.ds, self.dt);
        Jet {
            xs: (p(i + 1, j) - p(i - 1, j)) / (2.0 * ds),
            xt: (p(i, jp) - p(i, jm)) / (2.0 * dt),
            xss: (p(i + 1, j) - 2.0 * c + p(i - 1, j)) / (ds * ds),
            xtt: (p(i, jp) - 2.0 * c + p(i, jm)) / (dt * dt),
            xst: (p(i + 1, jp) - p(i + 1, jm) - p(i - 1, jp) + p(i - 1, jm)) / (4.0 * ds * dt),
        }
    }

    /// Tangents at any node, one-sided second order on the grid edge.
    pub fn tangents_anywhere(&self, i: usize, j: usize) -> (Vec3, Vec3) {
        let p = |a: usize, b: usize| self.points[a * self.nt + b];
        let ns = self.ns;
        let xs = if i == 0 {
            (-3.0 * p(0, j) + 4.0 * p(1, j) - p(2, j)) / (2.0 * self.ds)
        } else if i == ns - 1 {
            (3.0 * p(ns - 1, j) - 4.0 * p(ns - 2, j) + p(ns - 3, j)) / (2.0 * self.ds)
        } else {
            (p(i + 1, j) - p(i - 1, j)) / (2.0 * self.ds)
        };
        let xt = match (self.shift_t(j, -1), self.shift_t(j, 1)) {
            (Some(jm), Some(jp)) => (p(i, jp) - p(i, jm)) / (2.0 * self.dt),
            (None, _) => (-3.0 * p(i, 0) + 4.0 * p(i, 1) - p(i, 2)) / (2.0 * self.dt),
            (_, None) => {
                let n = self.nt;
                (3.0 * p(i, n - 1) - 4.0 * p(i, n - 2) + p(i, n - 3)) / (2.0 * self.dt)
            }
        };
        (xs, xt)
    }

    /// Unit normal `X_s × X_t / |X_s × X_t|` at every node. Nodes where the
    /// cross product vanishes (collapsed rows such as poles) borrow the
    /// normal of the adjacent row.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut normals = vec![Vec3::zeros(); self.points.len()];
        for i in 0..self.ns {
            for j in 0..self.nt {
                let (xs, xt) = self.tangents_anywhere(i, j);
                let n = xs.cross(&xt);
                let len = n.norm();
                if len > 1e-14 {
                    normals[self.index(i, j)] = n / len;
                }
            }
        }
        for i in 0..self.ns {
            for j in 0..self.nt {
                if normals[self.index(i, j)].norm() == 0.0 {
                    let ni = if i == 0 { 1 } else { i - 1 };
                    let fallback = normals[self.index(ni, j)];
                    normals[self.index(i, j)] = if fallback.norm() > 0.0 {
                        fallback
                    } else {
                        Vec3::z()
                    };
                }
            }
        }
        normals
    }

    /// A row whose points all coincide is a coordinate singularity (a pole
    /// or a disk center), not a piece of the boundary.
    pub fn row_collapsed(&self, i: usize) -> bool {
        let first = self.point(i, 0);
        let scale = self
            .points
            .iter()
            .map(|p| p.norm())
            .fold(1.0_f64, f64::max);
        (0..self.nt).all(|j| (self.point(i, j) - first).norm() <= 1e-12 * scale)
    }

    /// Boundary node indices: edge rows (and edge columns when not
    /// periodic), excluding collapsed rows.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..self.ns {
            for j in 0..self.nt {
                let edge_row = (i == 0 || i == self.ns - 1) && !self.row_collapsed(i);
                let edge_col = !self.periodic_t && (j == 0 || j == self.nt - 1);
                if edge_row || edge_col {
                    out.push(self.index(i, j));
                }
            }
        }
        out
    }

    /// Copy of the patch with every point mapped through `f`.
    pub fn map_points<F: Fn(usize, Vec3) -> Vec3>(&self, f: F) -> Result<Self, GeomError> {
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| f(k, *p))
            .collect();
        Self::new(
            self.ns,
            self.nt,
            (self.s0, self.ds),
            (self.t0, self.dt),
            self.periodic_t,
            points,
        )
    }

    /// Every `step`-th node in each direction. Periodic patches need `nt`
    /// divisible by `step`.
    pub fn subsample(&self, step: usize) -> Result<Self, GeomError> {
        let step = step.max(1);
        let is: Vec<usize> = (0..self.ns).step_by(step).collect();
        let js: Vec<usize> = (0..self.nt).step_by(step).collect();
        let mut points = Vec::with_capacity(is.len() * js.len());
        for &i in &is {
            for &j in &js {
                points.push(self.point(i, j));
            }
        }
        Self::new(
            is.len(),
            js.len(),
            (self.s0, self.ds * step as f64),
            (self.t0, self.dt * step as f64),
            self.periodic_t,
            points,
        )
    }

    /// Number of quad cells; periodic patches close the seam.
    pub fn cell_count(&self) -> usize {
        let ct = if self.periodic_t { self.nt } else { self.nt - 1 };
        (self.ns - 1) * ct
    }

    /// Cells as `(i, j, j_next)` lower-left corners.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let ct = if self.periodic_t { self.nt } else { self.nt - 1 };
        (0..self.ns - 1).flat_map(move |i| (0..ct).map(move |j| (i, j, (j + 1) % self.nt)))
    }
}
