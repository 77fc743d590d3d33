use rayon::prelude::*;

use super::patch::{Jet, ParamPatch, Vec3};
use super::GeomError;

/// First and second fundamental forms at one interior node.
#[derive(Debug, Clone, Copy)]
pub struct NodeForms {
    /// `(E, F, G)`
    pub first: [f64; 3],
    /// `(e, f, g)` measured against `normal`.
    pub second: [f64; 3],
    pub normal: Vec3,
    pub jet: Jet,
}

impl NodeForms {
    pub fn det_first(&self) -> f64 {
        let [e, f, g] = self.first;
        e * g - f * f
    }

    /// Area density `sqrt(EG - F²)`.
    pub fn area_density(&self) -> f64 {
        self.det_first().sqrt()
    }

    /// Inverse metric `(g^ss, g^st, g^tt)`.
    pub fn inverse_metric(&self) -> [f64; 3] {
        let [e, f, g] = self.first;
        let det = e * g - f * f;
        [g / det, -f / det, e / det]
    }
}

/// Per-node forms on the full grid; `None` on boundary nodes.
#[derive(Debug, Clone)]
pub struct FormField {
    pub ns: usize,
    pub nt: usize,
    pub nodes: Vec<Option<NodeForms>>,
}

impl FormField {
    pub fn get(&self, i: usize, j: usize) -> Option<&NodeForms> {
        self.nodes[i * self.nt + j].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &NodeForms)> {
        let nt = self.nt;
        self.nodes
            .iter()
            .enumerate()
            .filter_map(move |(k, n)| n.as_ref().map(|n| (k / nt, k % nt, n)))
    }
}

/// Curvature scalars at one node. `h` uses the sum convention `κ1 + κ2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCurvature {
    pub h: f64,
    pub k: f64,
    pub a2: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub ns: usize,
    pub nt: usize,
    pub nodes: Vec<Option<NodeCurvature>>,
}

impl CurvatureField {
    pub fn get(&self, i: usize, j: usize) -> Option<&NodeCurvature> {
        self.nodes[i * self.nt + j].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &NodeCurvature)> {
        let nt = self.nt;
        self.nodes
            .iter()
            .enumerate()
            .filter_map(move |(k, n)| n.as_ref().map(|n| (k / nt, k % nt, n)))
    }

    pub fn max_abs_h(&self) -> f64 {
        self.iter().map(|(_, _, c)| c.h.abs()).fold(0.0, f64::max)
    }

    pub fn max_a2(&self) -> f64 {
        self.iter().map(|(_, _, c)| c.a2).fold(0.0, f64::max)
    }

    /// `|A|²` on the full grid, NaN where undefined.
    pub fn a2_grid(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|n| n.map_or(f64::NAN, |c| c.a2))
            .collect()
    }
}

/// Centered second-order fundamental forms at interior nodes.
pub fn fundamental_forms(patch: &ParamPatch) -> Result<FormField, GeomError> {
    let (ns, nt) = (patch.ns(), patch.nt());
    let nodes: Vec<Option<NodeForms>> = (0..ns * nt)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / nt, k % nt);
            if !patch.is_interior(i, j) {
                return Ok(None);
            }
            let jet = patch.jet(i, j);
            let e = jet.xs.dot(&jet.xs);
            let f = jet.xs.dot(&jet.xt);
            let g = jet.xt.dot(&jet.xt);
            let det = e * g - f * f;
            if !(e > 0.0 && g > 0.0 && det > 0.0) {
                return Err(GeomError::DegenerateMetric { i, j });
            }
            let cross = jet.xs.cross(&jet.xt);
            let normal = cross / cross.norm();
            Ok(Some(NodeForms {
                first: [e, f, g],
                second: [jet.xss.dot(&normal), jet.xst.dot(&normal), jet.xtt.dot(&normal)],
                normal,
                jet,
            }))
        })
        .collect::<Result<_, _>>()?;
    Ok(FormField { ns, nt, nodes })
}

/// Shape-operator curvatures from the forms. The mean curvature is the
/// divergence of the unit normal, so that outward normals on a round sphere
/// of radius `R` give `H = 2/R`.
pub fn curvature_scalars(forms: &FormField) -> CurvatureField {
    let nodes = forms
        .nodes
        .iter()
        .map(|n| n.as_ref().map(node_curvature))
        .collect();
    CurvatureField {
        ns: forms.ns,
        nt: forms.nt,
        nodes,
    }
}

fn node_curvature(n: &NodeForms) -> NodeCurvature {
    let [ee, ff, gg] = n.first;
    let [l, m, nn] = n.second;
    let det = ee * gg - ff * ff;
    let h = -(l * gg - 2.0 * m * ff + nn * ee) / det;
    let k = (l * nn - m * m) / det;
    let disc = (0.25 * h * h - k).max(0.0).sqrt();
    let k1 = 0.5 * h - disc;
    let k2 = 0.5 * h + disc;
    NodeCurvature {
        h,
        k,
        a2: k1 * k1 + k2 * k2,
        k1,
        k2,
    }
}

/// Surface Laplacian `g^{ij}(∂_ij f − Γ^k_ij ∂_k f)` at nodes whose 3×3
/// stencil lies inside the grid and carries finite values. Other nodes are
/// NaN. `field` is indexed like the patch.
pub fn surface_laplacian(field: &[f64], patch: &ParamPatch) -> Result<Vec<f64>, GeomError> {
    if field.len() != patch.len() {
        return Err(GeomError::ShapeMismatch {
            expected: patch.len(),
            got: field.len(),
        });
    }
    let (ns, nt) = (patch.ns(), patch.nt());
    let (ds, dt) = (patch.ds(), patch.dt());
    (0..ns * nt)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / nt, k % nt);
            if !patch.is_interior(i, j) {
                return Ok(f64::NAN);
            }
            let jp = patch.shift_t(j, 1).unwrap();
            let jm = patch.shift_t(j, -1).unwrap();
            let v = |a: usize, b: usize| field[a * nt + b];
            let stencil = [
                v(i, j),
                v(i + 1, j),
                v(i - 1, j),
                v(i, jp),
                v(i, jm),
                v(i + 1, jp),
                v(i + 1, jm),
                v(i - 1, jp),
                v(i - 1, jm),
            ];
            if stencil.iter().any(|x| !x.is_finite()) {
                return Ok(f64::NAN);
            }
            let fs = (v(i + 1, j) - v(i - 1, j)) / (2.0 * ds);
            let ft = (v(i, jp) - v(i, jm)) / (2.0 * dt);
            let fss = (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) / (ds * ds);
            let ftt = (v(i, jp) - 2.0 * v(i, j) + v(i, jm)) / (dt * dt);
            let fst = (v(i + 1, jp) - v(i + 1, jm) - v(i - 1, jp) + v(i - 1, jm)) / (4.0 * ds * dt);
            let jet = patch.jet(i, j);
            Ok(laplace_from_jet(&jet, [fs, ft], [fss, fst, ftt]).ok_or(
                GeomError::DegenerateMetric { i, j },
            )?)
        })
        .collect()
}

/// Christoffel symbols `Γ^k_ij` indexed `[k][pair]` with pairs `(ss, st, tt)`.
pub fn christoffel(jet: &Jet) -> Option<[[f64; 3]; 2]> {
    let e = jet.xs.dot(&jet.xs);
    let f = jet.xs.dot(&jet.xt);
    let g = jet.xt.dot(&jet.xt);
    let det = e * g - f * f;
    if det <= 0.0 {
        return None;
    }
    let inv = [g / det, -f / det, e / det];
    let mut out = [[0.0; 3]; 2];
    for (p, xij) in [jet.xss, jet.xst, jet.xtt].iter().enumerate() {
        let a = xij.dot(&jet.xs);
        let b = xij.dot(&jet.xt);
        out[0][p] = inv[0] * a + inv[1] * b;
        out[1][p] = inv[1] * a + inv[2] * b;
    }
    Some(out)
}

fn laplace_from_jet(jet: &Jet, grad: [f64; 2], hess: [f64; 3]) -> Option<f64> {
    let gam = christoffel(jet)?;
    let e = jet.xs.dot(&jet.xs);
    let f = jet.xs.dot(&jet.xt);
    let g = jet.xt.dot(&jet.xt);
    let det = e * g - f * f;
    let inv = [g / det, -f / det, e / det];
    let cov = |p: usize| hess[p] - gam[0][p] * grad[0] - gam[1][p] * grad[1];
    Some(inv[0] * cov(0) + 2.0 * inv[1] * cov(1) + inv[2] * cov(2))
}
