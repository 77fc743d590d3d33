//! Convex hull of the boundary points and the distance by which interior
//! points escape it.

use nalgebra::{Matrix3, Vector2};

use super::patch::{ParamPatch, Vec3};

#[derive(Debug, Clone, Copy)]
struct Facet {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    alive: bool,
}

/// Supporting halfspaces `normal · x ≤ offset` of a point cloud's hull.
#[derive(Debug, Clone)]
pub enum Hull {
    Solid(Vec<(Vec3, f64)>),
    /// Coplanar input: plane through `origin` with in-plane basis `(e1, e2)`
    /// and normal; polygon vertices in plane coordinates, counter-clockwise.
    Planar {
        origin: Vec3,
        e1: Vec3,
        e2: Vec3,
        normal: Vec3,
        polygon: Vec<Vector2<f64>>,
    },
}

impl Hull {
    pub fn build(points: &[Vec3]) -> Hull {
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let centroid = points.iter().fold(Vec3::zeros(), |a, p| a + p) / points.len() as f64;
        let mut cov = Matrix3::zeros();
        for p in points {
            let d = p - centroid;
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
        let normal: Vec3 = eig.eigenvectors.column(imin).into();
        let spread = points
            .iter()
            .map(|p| (p - centroid).dot(&normal).abs())
            .fold(0.0, f64::max);
        if spread <= 1e-10 * scale {
            let helper = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let e1 = normal.cross(&helper).normalize();
            let e2 = normal.cross(&e1);
            let planar: Vec<Vector2<f64>> = points
                .iter()
                .map(|p| {
                    let d = p - centroid;
                    Vector2::new(d.dot(&e1), d.dot(&e2))
                })
                .collect();
            return Hull::Planar {
                origin: centroid,
                e1,
                e2,
                normal,
                polygon: monotone_chain(planar),
            };
        }
        Hull::Solid(solid_hull(points, scale))
    }

    /// Signed distance outside: positive outside, non-positive inside. For a
    /// solid hull this is the largest facet-plane excess.
    pub fn excess(&self, p: &Vec3) -> f64 {
        match self {
            Hull::Solid(facets) => facets
                .iter()
                .map(|(n, d)| n.dot(p) - d)
                .fold(f64::NEG_INFINITY, f64::max),
            Hull::Planar {
                origin,
                e1,
                e2,
                normal,
                polygon,
            } => {
                let d = p - origin;
                let off = d.dot(normal).abs();
                let q = Vector2::new(d.dot(e1), d.dot(e2));
                let inplane = polygon_excess(polygon, &q);
                if off > 0.0 {
                    (off * off + inplane.max(0.0).powi(2)).sqrt()
                } else {
                    inplane
                }
            }
        }
    }
}

fn solid_hull(points: &[Vec3], scale: f64) -> Vec<(Vec3, f64)> {
    let eps = 1e-12 * scale;
    let n = points.len();
    // initial tetrahedron from extreme points
    let p0 = (0..n)
        .min_by(|&a, &b| points[a].x.total_cmp(&points[b].x))
        .unwrap();
    let p1 = (0..n)
        .max_by(|&a, &b| {
            (points[a] - points[p0])
                .norm()
                .total_cmp(&(points[b] - points[p0]).norm())
        })
        .unwrap();
    let line = (points[p1] - points[p0]).normalize();
    let dist_line = |k: usize| {
        let d = points[k] - points[p0];
        (d - line * d.dot(&line)).norm()
    };
    let p2 = (0..n)
        .max_by(|&a, &b| dist_line(a).total_cmp(&dist_line(b)))
        .unwrap();
    let pn = (points[p1] - points[p0])
        .cross(&(points[p2] - points[p0]))
        .normalize();
    let p3 = (0..n)
        .max_by(|&a, &b| {
            (points[a] - points[p0])
                .dot(&pn)
                .abs()
                .total_cmp(&(points[b] - points[p0]).dot(&pn).abs())
        })
        .unwrap();
    let inside = (points[p0] + points[p1] + points[p2] + points[p3]) / 4.0;

    let make = |v: [usize; 3], inside: &Vec3| -> Facet {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let mut normal = (b - a).cross(&(c - a));
        let len = normal.norm();
        let mut v = v;
        if len > 0.0 {
            normal /= len;
        }
        if normal.dot(&(inside - a)) > 0.0 {
            normal = -normal;
            v.swap(1, 2);
        }
        Facet {
            v,
            normal,
            offset: normal.dot(&a),
            alive: len > 1e-14 * scale * scale,
        }
    };

    let mut facets = vec![
        make([p0, p1, p2], &inside),
        make([p0, p1, p3], &inside),
        make([p0, p2, p3], &inside),
        make([p1, p2, p3], &inside),
    ];
    let seed = [p0, p1, p2, p3];
    for k in 0..n {
        if seed.contains(&k) {
            continue;
        }
        let p = points[k];
        let visible: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.normal.dot(&p) - f.offset > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for &fi in &visible {
            let v = facets[fi].v;
            edges.extend([(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]);
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| !edges.contains(&(b, a)))
            .collect();
        for &fi in &visible {
            facets[fi].alive = false;
        }
        for (a, b) in horizon {
            facets.push(make([a, b, k], &inside));
        }
    }
    facets
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| (f.normal, f.offset))
        .collect()
}

fn monotone_chain(mut pts: Vec<Vector2<f64>>) -> Vec<Vector2<f64>> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut lower: Vec<Vector2<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Largest outward edge-line excess of `q` against a counter-clockwise
/// polygon.
fn polygon_excess(poly: &[Vector2<f64>], q: &Vector2<f64>) -> f64 {
    let m = poly.len();
    (0..m)
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % m];
            let e = b - a;
            let outward = Vector2::new(e.y, -e.x).normalize();
            outward.dot(&(q - a))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest distance by which a non-boundary node lies outside the convex
/// hull of the boundary nodes (zero when every node is inside).
pub fn convex_hull_check(patch: &ParamPatch) -> f64 {
    let boundary = patch.boundary_nodes();
    let bpts: Vec<Vec3> = boundary.iter().map(|&k| patch.points()[k]).collect();
    let hull = Hull::build(&bpts);
    let mut is_boundary = vec![false; patch.len()];
    for &k in &boundary {
        is_boundary[k] = true;
    }
    patch
        .points()
        .iter()
        .enumerate()
        .filter(|(k, _)| !is_boundary[*k])
        .map(|(_, p)| hull.excess(p))
        .fold(0.0, f64::max)
}
