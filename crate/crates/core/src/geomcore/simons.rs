use super::forms::{christoffel, curvature_scalars, fundamental_forms, surface_laplacian};
use super::patch::ParamPatch;
use super::GeomError;

/// Terms of `Δ|A|² = −2|A|⁴ + 2|∇A|²` at nodes two rings in from the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimonsReport {
    /// `max |Δ|A|² + 2|A|⁴ − 2|∇A|²|`
    pub residual: f64,
    /// `min (Δ|A|² + 2|A|⁴)`, non-negative for exact minimal surfaces.
    pub inequality_min: f64,
    pub max_abs_h: f64,
    pub nodes: usize,
}

/// Largest `|H|` accepted as numerically minimal.
pub const MINIMALITY_TOL: f64 = 1e-3;

pub fn simons_residual(patch: &ParamPatch) -> Result<SimonsReport, GeomError> {
    let forms = fundamental_forms(patch)?;
    let curv = curvature_scalars(&forms);
    let max_abs_h = curv.max_abs_h();
    if max_abs_h > MINIMALITY_TOL {
        return Err(GeomError::NotMinimal { max_h: max_abs_h });
    }
    let lap = surface_laplacian(&curv.a2_grid(), patch)?;
    let nt = patch.nt();
    let (ds, dt) = (patch.ds(), patch.dt());
    // second fundamental form components against a consistent normal
    let h_at = |i: usize, j: usize| forms.get(i, j).map(|n| n.second);

    let mut residual: f64 = 0.0;
    let mut inequality_min = f64::INFINITY;
    let mut nodes = 0;
    for i in 0..patch.ns() {
        for j in 0..nt {
            if !patch.in_ring(i, j, 2) {
                continue;
            }
            let l = lap[i * nt + j];
            if !l.is_finite() {
                continue;
            }
            let node = forms.get(i, j).expect("ring-2 node is interior");
            let jp = patch.shift_t(j, 1).unwrap();
            let jm = patch.shift_t(j, -1).unwrap();
            let (Some(hp_s), Some(hm_s), Some(hp_t), Some(hm_t)) =
                (h_at(i + 1, j), h_at(i - 1, j), h_at(i, jp), h_at(i, jm))
            else {
                continue;
            };
            let gam = christoffel(&node.jet).ok_or(GeomError::DegenerateMetric { i, j })?;
            let inv = node.inverse_metric();
            let ginv = [[inv[0], inv[1]], [inv[1], inv[2]]];
            let sym = |c: [f64; 3]| [[c[0], c[1]], [c[1], c[2]]];
            let hh = sym(node.second);
            let d_s = sym([
                (hp_s[0] - hm_s[0]) / (2.0 * ds),
                (hp_s[1] - hm_s[1]) / (2.0 * ds),
                (hp_s[2] - hm_s[2]) / (2.0 * ds),
            ]);
            let d_t = sym([
                (hp_t[0] - hm_t[0]) / (2.0 * dt),
                (hp_t[1] - hm_t[1]) / (2.0 * dt),
                (hp_t[2] - hm_t[2]) / (2.0 * dt),
            ]);
            let pair = |a: usize, b: usize| match (a, b) {
                (0, 0) => 0,
                (1, 1) => 2,
                _ => 1,
            };
            let g = |k: usize, a: usize, b: usize| gam[k][pair(a, b)];
            // ∇_k h_ij
            let mut nabla = [[[0.0; 2]; 2]; 2];
            for (k, dk) in [d_s, d_t].iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut v = dk[a][b];
                        for m in 0..2 {
                            v -= g(m, k, a) * hh[m][b] + g(m, k, b) * hh[a][m];
                        }
                        nabla[k][a][b] = v;
                    }
                }
            }
            let mut grad_sq = 0.0;
            for k in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        for kk in 0..2 {
                            for aa in 0..2 {
                                for bb in 0..2 {
                                    grad_sq += ginv[k][kk]
                                        * ginv[a][aa]
                                        * ginv[b][bb]
                                        * nabla[k][a][b]
                                        * nabla[kk][aa][bb];
                                }
                            }
                        }
                    }
                }
            }
            let a2 = curv.get(i, j).unwrap().a2;
            residual = residual.max((l + 2.0 * a2 * a2 - 2.0 * grad_sq).abs());
            inequality_min = inequality_min.min(l + 2.0 * a2 * a2);
            nodes += 1;
        }
    }
    Ok(SimonsReport {
        residual,
        inequality_min,
        max_abs_h,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::Vec3;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn plane_has_zero_residual() {
        let patch = ParamPatch::from_fn((0.0, 1.0), (0.0, 1.0), 12, 12, false, |s, t| {
            Vec3::new(s, t, 0.3 * s - 0.2 * t)
        })
        .unwrap();
        let r = simons_residual(&patch).unwrap();
        assert!(r.residual < 1e-9);
        assert!(r.nodes > 0);
    }

    #[test]
    fn sphere_is_rejected() {
        let patch = ParamPatch::from_fn((0.5, 2.5), (0.0, TAU), 30, 64, true, |s, t| {
            Vec3::new(s.sin() * t.cos(), s.sin() * t.sin(), s.cos())
        })
        .unwrap();
        assert!(matches!(
            simons_residual(&patch),
            Err(GeomError::NotMinimal { .. })
        ));
    }

    #[test]
    fn catenoid_residual_converges_at_second_order() {
        let run = |n: usize| {
            let patch = ParamPatch::from_fn((-1.0, 1.0), (0.0, TAU), n + 1, n, true, |s, t| {
                Vec3::new(s.cosh() * t.cos(), s.cosh() * t.sin(), s)
            })
            .unwrap();
            simons_residual(&patch).unwrap()
        };
        let (a, b) = (run(128), run(256));
        let ratio = a.residual / b.residual;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        assert!(b.inequality_min > -1e-3);
    }

    #[test]
    fn helicoid_residual_converges_at_second_order() {
        let run = |n: usize| {
            let patch = ParamPatch::from_fn((-1.0, 1.0), (0.0, PI), n + 1, n + 1, false, |s, t| {
                Vec3::new(s * t.cos(), s * t.sin(), t)
            })
            .unwrap();
            simons_residual(&patch).unwrap()
        };
        let (a, b) = (run(128), run(256));
        let ratio = a.residual / b.residual;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        assert!(b.inequality_min > -1e-3);
    }
}
