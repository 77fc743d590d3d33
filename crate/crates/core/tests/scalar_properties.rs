use std::f64::consts::PI;

use minsurf_core::ricciwidth::{
    extinction_bisect, extinction_bound, scalar_lower_bound, width_rk4, width_trajectory,
};
use minsurf_core::spectra::{
    bochner_residual, cone_degree, cone_eigenvalue, dim_brute_force, dim_closed_form, sublevel_fraction,
    torus_samples, FlatField,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn width_decreases_below_the_barrier(w0 in 0.1f64..200.0, c in 0.1f64..8.0, f0 in 0.0f64..0.98, df in 0.001f64..0.02) {
        let t_ext = extinction_bound(w0, c);
        let (t1, t2) = (f0 * t_ext, (f0 + df).min(1.0) * t_ext);
        let (a, b) = (width_trajectory(w0, c, t1), width_trajectory(w0, c, t2));
        if a < 16.0 * PI / 3.0 * (t1 + c) && a > 0.0 {
            prop_assert!(b < a, "W({t2}) = {b} ≥ W({t1}) = {a}");
        }
        prop_assert!(b >= 0.0);
    }

    #[test]
    fn closed_form_matches_rk4(w0 in 0.5f64..60.0, c in 0.25f64..5.0, f in 0.0f64..0.95) {
        let t = f * extinction_bound(w0, c);
        let steps = 2000usize.max((2000.0 * t).ceil() as usize);
        let exact = width_trajectory(w0, c, t);
        prop_assert!((exact - width_rk4(w0, c, t, steps)).abs() <= 1e-8 * (1.0 + w0));
    }

    #[test]
    fn extinction_time_is_the_unique_zero(w0 in 0.01f64..500.0, c in 0.05f64..10.0) {
        let t = extinction_bound(w0, c);
        prop_assert!(t > 0.0);
        prop_assert!(width_trajectory(w0, c, t).abs() <= 1e-9 * (1.0 + w0));
        prop_assert!(width_trajectory(w0, c, t * (1.0 - 1e-6)) > 0.0);
        let b = extinction_bisect(w0, c, 1e-12);
        prop_assert!((b - t).abs() <= 1e-9 * (1.0 + t), "bisection {b} vs closed form {t}");
    }

    #[test]
    fn scalar_bound_relaxes(min_r0 in -50.0f64..-1e-3, n in 2usize..8, t in 0.0f64..10.0, dt in 0.0f64..5.0) {
        let a = scalar_lower_bound(min_r0, n, t);
        let b = scalar_lower_bound(min_r0, n, t + dt);
        prop_assert!(b >= a);
        prop_assert!(b <= 0.0);
    }

    #[test]
    fn cone_round_trip(k in 2usize..9, p in 0.0f64..40.0) {
        let fwd = cone_eigenvalue(k, p).unwrap();
        let expected = p * p + (k as f64 - 2.0) * p;
        prop_assert!((fwd.lambda - expected).abs() <= 4.0 * f64::EPSILON * expected);
        let back = cone_degree(k, fwd.lambda).unwrap();
        prop_assert!((back.p - p).abs() <= 1e-14 * (1.0 + p));
    }

    #[test]
    fn sublevel_is_monotone_and_scale_free(
        e1 in 0.0f64..1.0,
        e2 in 0.0f64..1.0,
        lambda in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
        m in 1u32..4,
    ) {
        let v = torus_samples(64, 2, |x| (m as f64 * x[0]).sin() + 0.5 * (x[1]).cos());
        let scaled: Vec<f64> = v.iter().map(|x| lambda * x).collect();
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let f_lo = sublevel_fraction(&v, lo).unwrap();
        prop_assert!(f_lo <= sublevel_fraction(&v, hi).unwrap());
        prop_assert_eq!(f_lo, sublevel_fraction(&scaled, lo).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn harmonic_dimensions_agree(n in 1usize..=4, d in 0usize..=12) {
        prop_assert_eq!(dim_closed_form(n, d).unwrap(), dim_brute_force(n, d).unwrap());
    }

    #[test]
    fn bochner_vanishes_on_harmonic_quadratics(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let f = FlatField::from_fn(&[-1.0, -1.0], &[0.05, 0.05], &[41, 41], |x| {
            a * (x[0] * x[0] - x[1] * x[1]) + b * x[0] * x[1] + c * x[0]
        })
        .unwrap();
        prop_assert!(bochner_residual(&f) <= 1e-9 * (1.0 + a * a + b * b + c * c));
    }
}
