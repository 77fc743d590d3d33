//! Scalar-curvature lower bound under Ricci flow and the width ODE
//! `dW/dt = −4π + 3W / (4(t + C))` with its extinction time, in dimension 3.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthState {
    pub t: f64,
    pub w: f64,
    pub c: f64,
}

/// `R(t) ≥ 1/(1/min R(0) − 2t/n)` when `min R(0) < 0`; otherwise the `C = 0`
/// form `−n/(2t)` (−∞ at `t = 0`).
pub fn scalar_lower_bound(min_r0: f64, n: usize, t: f64) -> f64 {
    let n = n as f64;
    if min_r0 < 0.0 {
        1.0 / (1.0 / min_r0 - 2.0 * t / n)
    } else if t > 0.0 {
        -n / (2.0 * t)
    } else {
        f64::NEG_INFINITY
    }
}

/// The offset `C = n / (−2 min R(0))` linking the scalar bound to `−n/(2(t+C))`.
pub fn scalar_offset(min_r0: f64, n: usize) -> Option<f64> {
    (min_r0 < 0.0).then(|| n as f64 / (-2.0 * min_r0))
}

/// RK4 for the comparison ODE `R' = (2/n) R²`.
pub fn scalar_bound_rk4(min_r0: f64, n: usize, t: f64, steps: usize) -> f64 {
    let n = n as f64;
    rk4(|_, r| 2.0 / n * r * r, min_r0, 0.0, t, steps)
}

fn width_unclamped(w0: f64, c: f64, t: f64) -> f64 {
    let tau = t + c;
    tau.powf(0.75) * (w0 * c.powf(-0.75) - 16.0 * PI * (tau.powf(0.25) - c.powf(0.25)))
}

/// Equality solution of the width ODE, clamped at 0 after extinction.
pub fn width_trajectory(w0: f64, c: f64, t: f64) -> f64 {
    width_unclamped(w0, c, t).max(0.0)
}

/// RK4 solution of `W' = −4π + 3W/(4(t+C))` without clamping.
pub fn width_rk4(w0: f64, c: f64, t: f64, steps: usize) -> f64 {
    rk4(|s, w| -4.0 * PI + 0.75 * w / (s + c), w0, 0.0, t, steps)
}

/// `T = (C^{1/4} + W0 / (16π C^{3/4}))⁴ − C`
pub fn extinction_bound(w0: f64, c: f64) -> f64 {
    (c.powf(0.25) + w0 / (16.0 * PI * c.powf(0.75))).powi(4) - c
}

/// Zero of the unclamped trajectory by bisection, for cross-checking.
pub fn extinction_bisect(w0: f64, c: f64, tol: f64) -> f64 {
    if w0 <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while width_unclamped(w0, c, hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if width_unclamped(w0, c, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(t, W(t))` at `n` evenly spaced times in `[0, t_end]`.
pub fn width_samples(w0: f64, c: f64, t_end: f64, n: usize) -> Vec<WidthState> {
    let n = n.max(2);
    (0..n)
        .map(|k| {
            let t = t_end * k as f64 / (n - 1) as f64;
            WidthState {
                t,
                w: width_trajectory(w0, c, t),
                c,
            }
        })
        .collect()
}

/// Area of a minimal 2-sphere changes at most at rate `−4π − (area/2) min R`.
pub fn minimal_sphere_area_derivative(area: f64, min_r: f64) -> f64 {
    -4.0 * PI - 0.5 * area * min_r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_bound_examples() {
        assert_eq!(scalar_lower_bound(-3.0, 3, 0.0), -3.0);
        assert!((scalar_lower_bound(-3.0, 3, 1.0) + 1.0).abs() < 1e-15);
        assert!((scalar_bound_rk4(-3.0, 3, 1.0, 2000) + 1.0).abs() < 1e-10);
        assert!((scalar_lower_bound(5.0, 3, 2.0) + 0.75).abs() < 1e-15);
        let c = scalar_offset(-3.0, 3).unwrap();
        assert!((scalar_lower_bound(-3.0, 3, 0.7) + 3.0 / (2.0 * (0.7 + c))).abs() < 1e-14);
    }

    #[test]
    fn scalar_bound_relaxes_towards_zero() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..50 {
            let v = scalar_lower_bound(-2.0, 4, 0.1 * k as f64);
            assert!(v >= prev && v < 0.0);
            prev = v;
        }
    }

    #[test]
    fn constructed_extinction_at_one() {
        let w0 = 16.0 * PI * (2f64.powf(0.25) - 1.0);
        assert!(width_trajectory(w0, 1.0, 1.0).abs() < 1e-12);
        assert!((extinction_bound(w0, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(width_trajectory(0.0, 1.0, 0.0), 0.0);
        assert_eq!(extinction_bound(0.0, 1.0), 0.0);
    }

    #[test]
    fn closed_form_matches_rk4() {
        assert!((width_trajectory(100.0, 1.0, 0.1) - width_rk4(100.0, 1.0, 0.1, 1000)).abs() < 1e-8);
    }

    #[test]
    fn extinction_matches_bisection_and_grows_with_width() {
        for (w0, c) in [(10.0, 1.0), (100.0, 0.5), (3.0, 4.0)] {
            let t = extinction_bound(w0, c);
            assert!((t - extinction_bisect(w0, c, 1e-14)).abs() < 1e-10 * t.max(1.0));
            assert!(width_trajectory(w0, c, 0.5 * t) > 0.0);
            assert_eq!(width_trajectory(w0, c, 1.5 * t), 0.0);
        }
        assert!(extinction_bound(20.0, 1.0) > extinction_bound(10.0, 1.0));
    }

    #[test]
    fn decreasing_below_the_critical_line() {
        let (w0, c) = (30.0, 2.0);
        let t_end = extinction_bound(w0, c);
        let s = width_samples(w0, c, t_end, 200);
        for pair in s.windows(2) {
            if pair[0].w < 16.0 * PI / 3.0 * (pair[0].t + c) && pair[0].w > 0.0 {
                assert!(pair[1].w < pair[0].w);
            }
        }
    }

    #[test]
    fn area_derivative_bound() {
        assert_eq!(minimal_sphere_area_derivative(7.0, 0.0), -4.0 * PI);
        assert!((minimal_sphere_area_derivative(4.0 * PI, 6.0) + 16.0 * PI).abs() < 1e-12);
        assert_eq!(minimal_sphere_area_derivative(0.0, -5.0), -4.0 * PI);
    }
}
