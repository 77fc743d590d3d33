use super::forms::{curvature_scalars, fundamental_forms};
use super::patch::{ParamPatch, Vec3};
use super::GeomError;

/// Centroid and area density `|X_s × X_t|` at the midpoint of a cell.
#[inline]
pub fn cell_midpoint(patch: &ParamPatch, i: usize, j: usize, jn: usize) -> (Vec3, f64) {
    let p00 = patch.point(i, j);
    let p10 = patch.point(i + 1, j);
    let p01 = patch.point(i, jn);
    let p11 = patch.point(i + 1, jn);
    let xs = (p10 + p11 - p00 - p01) / (2.0 * patch.ds());
    let xt = (p01 + p11 - p00 - p10) / (2.0 * patch.dt());
    let center = (p00 + p10 + p01 + p11) / 4.0;
    (center, xs.cross(&xt).norm())
}

/// Midpoint-rule area of the cells whose centroid satisfies `region`.
pub fn patch_area<R: Fn(&Vec3) -> bool>(patch: &ParamPatch, region: R) -> f64 {
    weighted_area(patch, |c| if region(c) { 1.0 } else { 0.0 })
}

/// Midpoint-rule integral of `weight(centroid)` over the patch.
pub fn weighted_area<W: Fn(&Vec3) -> f64>(patch: &ParamPatch, weight: W) -> f64 {
    let cell = patch.ds() * patch.dt();
    let mut total = 0.0;
    for (i, j, jn) in patch.cells() {
        let (c, dens) = cell_midpoint(patch, i, j, jn);
        let w = weight(&c);
        if w != 0.0 {
            total += w * dens * cell;
        }
    }
    total
}

/// Midpoint-rule integral of a nodal field over the cells accepted by
/// `region`; cell values are the mean of the four corners.
pub fn integrate_field<R: Fn(&Vec3) -> bool>(patch: &ParamPatch, field: &[f64], region: R) -> f64 {
    let cell = patch.ds() * patch.dt();
    let nt = patch.nt();
    let mut total = 0.0;
    for (i, j, jn) in patch.cells() {
        let (c, dens) = cell_midpoint(patch, i, j, jn);
        if region(&c) {
            let v = 0.25
                * (field[i * nt + j]
                    + field[(i + 1) * nt + j]
                    + field[i * nt + jn]
                    + field[(i + 1) * nt + jn]);
            total += v * dens * cell;
        }
    }
    total
}

/// Both sides of the first variation of area for the normal variation
/// `x + h φ(x) n(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariation {
    /// `(A(+h) − A(−h)) / 2h`
    pub numeric_derivative: f64,
    /// `∫ φ H dA`
    pub flux_integral: f64,
}

impl FirstVariation {
    pub fn gap(&self) -> f64 {
        (self.numeric_derivative - self.flux_integral).abs()
    }
}

pub fn first_variation(patch: &ParamPatch, phi: &[f64], h: f64) -> Result<FirstVariation, GeomError> {
    if phi.len() != patch.len() {
        return Err(GeomError::ShapeMismatch {
            expected: patch.len(),
            got: phi.len(),
        });
    }
    let (ns, nt) = (patch.ns(), patch.nt());
    for i in 0..ns {
        for j in 0..nt {
            if phi[i * nt + j] != 0.0 && !patch.in_ring(i, j, 2) {
                return Err(GeomError::SupportNotCompact { i, j });
            }
        }
    }
    let forms = fundamental_forms(patch)?;
    let curv = curvature_scalars(&forms);
    let mut normals = vec![Vec3::zeros(); patch.len()];
    let mut flux = 0.0;
    for (i, j, n) in forms.iter() {
        let k = i * nt + j;
        normals[k] = n.normal;
        if phi[k] != 0.0 {
            let c = curv.get(i, j).expect("same support");
            flux += phi[k] * c.h * n.area_density();
        }
    }
    flux *= patch.ds() * patch.dt();
    let offset = |sign: f64| {
        patch
            .map_points(|k, p| p + sign * h * phi[k] * normals[k])
            .map_err(|_| GeomError::StepTooLarge { h })
    };
    let plus = patch_area(&offset(1.0)?, |_| true);
    let minus = patch_area(&offset(-1.0)?, |_| true);
    Ok(FirstVariation {
        numeric_derivative: (plus - minus) / (2.0 * h),
        flux_integral: flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn unit_disk_polar_graph() {
        let patch = ParamPatch::from_fn((0.0, 1.0), (0.0, TAU), 200, 200, true, |r, t| {
            Vec3::new(r * t.cos(), r * t.sin(), 0.0)
        })
        .unwrap();
        assert_abs_diff_eq!(patch_area(&patch, |_| true), PI, epsilon = 1e-3);
    }

    #[test]
    fn unit_disk_by_cell_counting_is_first_order() {
        let patch = ParamPatch::from_fn((-1.1, 1.1), (-1.1, 1.1), 200, 200, false, |s, t| {
            Vec3::new(s, t, 0.0)
        })
        .unwrap();
        let a = patch_area(&patch, |c| c.x * c.x + c.y * c.y < 1.0);
        // one cell row along the rim
        assert_abs_diff_eq!(a, PI, epsilon = TAU * patch.ds());
    }

    fn second_order(f: impl Fn(usize) -> f64, exact: f64) {
        let (e1, e2) = ((f(128) - exact).abs(), (f(256) - exact).abs());
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        assert!(e2 < 2e-3, "error {e2}");
    }

    #[test]
    fn catenoid_band_area() {
        let exact = TAU * (1.0 + 0.5 * 2f64.sinh());
        second_order(
            |n| {
                let patch = ParamPatch::from_fn((-1.0, 1.0), (0.0, TAU), n + 1, n, true, |s, t| {
                    Vec3::new(s.cosh() * t.cos(), s.cosh() * t.sin(), s)
                })
                .unwrap();
                patch_area(&patch, |_| true)
            },
            exact,
        );
    }

    #[test]
    fn helicoid_area() {
        let exact = TAU * 0.5 * (2f64.sqrt() + 1f64.asinh());
        second_order(
            |n| {
                let patch = ParamPatch::from_fn((0.0, 1.0), (0.0, TAU), n + 1, n + 1, false, |s, t| {
                    Vec3::new(s * t.cos(), s * t.sin(), t)
                })
                .unwrap();
                patch_area(&patch, |_| true)
            },
            exact,
        );
    }

    fn bump(patch: &ParamPatch, center: (f64, f64), radius: f64) -> Vec<f64> {
        let mut phi = vec![0.0; patch.len()];
        for i in 0..patch.ns() {
            for j in 0..patch.nt() {
                let (s, t) = patch.param(i, j);
                let r2 = ((s - center.0).powi(2) + (t - center.1).powi(2)) / (radius * radius);
                if r2 < 1.0 && patch.in_ring(i, j, 2) {
                    phi[i * patch.nt() + j] = (-1.0 / (1.0 - r2)).exp() * 1f64.exp();
                }
            }
        }
        phi
    }

    #[test]
    fn first_variation_vanishes_on_helicoid() {
        let patch = ParamPatch::from_fn((-1.0, 1.0), (0.0, PI), 97, 97, false, |s, t| {
            Vec3::new(s * t.cos(), s * t.sin(), t)
        })
        .unwrap();
        let phi = bump(&patch, (0.0, PI / 2.0), 0.7);
        let fv = first_variation(&patch, &phi, 1e-4).unwrap();
        assert!(fv.flux_integral.abs() < 1e-3);
        assert!(fv.numeric_derivative.abs() < 1e-3);
    }

    #[test]
    fn first_variation_sphere_cap_is_twice_mass() {
        let patch = ParamPatch::from_fn((0.2, 1.2), (0.0, TAU), 129, 128, true, |s, t| {
            Vec3::new(s.sin() * t.cos(), s.sin() * t.sin(), s.cos())
        })
        .unwrap();
        let mut phi = vec![0.0; patch.len()];
        for i in 0..patch.ns() {
            let (s, _) = patch.param(i, 0);
            let x = (s - 0.7) / 0.45;
            if x.abs() < 1.0 && patch.in_ring(i, 0, 2) {
                for j in 0..patch.nt() {
                    phi[i * patch.nt() + j] = (-1.0 / (1.0 - x * x)).exp();
                }
            }
        }
        let mass = integrate_field(&patch, &phi, |_| true);
        let fv = first_variation(&patch, &phi, 1e-4).unwrap();
        assert_abs_diff_eq!(fv.flux_integral, 2.0 * mass, epsilon = 1e-3 * mass.max(1.0));
        assert!(fv.gap() < 1e-3, "gap {}", fv.gap());
    }

    #[test]
    fn first_variation_rejects_boundary_support() {
        let patch = ParamPatch::from_fn((0.0, 1.0), (0.0, 1.0), 8, 8, false, |s, t| {
            Vec3::new(s, t, 0.0)
        })
        .unwrap();
        let mut phi = vec![0.0; patch.len()];
        phi[patch.index(1, 4)] = 1.0;
        assert!(matches!(
            first_variation(&patch, &phi, 1e-3),
            Err(GeomError::SupportNotCompact { .. })
        ));
    }
}
