use std::f64::consts::{PI, TAU};

use minsurf_core::annulus::{average_drift, oscillation_check, AnnulusFunction, AnnulusPreset};
use minsurf_core::graphflow::{mcf_flow, solve_dirichlet, FlowOptions, GraphFunction, Grid2, NewtonOptions};
use minsurf_core::multigraph::{
    build_model, cauchy_decompose, separation, separation_sign, Model, MultiGraph, Resolution, Sector,
    StandardPiece,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> Grid2 {
    Grid2::new((-1.0, 1.0), (-1.0, 1.0), 21, 21).unwrap()
}

fn bump(amp: f64, x: f64, y: f64) -> f64 {
    amp * (-3.0 * (x * x + y * y)).exp()
}

fn small_sector() -> (Sector, Resolution) {
    (
        Sector::new(1.0, 64.0, -PI, 3.0 * PI).unwrap(),
        Resolution { n_rho: 97, per_turn: 64 },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ordered_data_stay_ordered(a in -1.0f64..1.0, gap in 0.0f64..0.5, tilt in -0.5f64..0.5) {
        let u0 = GraphFunction::from_fn(grid(), |x, y| bump(a, x, y) + tilt * x).unwrap();
        let v0 = GraphFunction::from_fn(grid(), |x, y| bump(a + gap, x, y) + tilt * x + gap * 0.1).unwrap();
        let opts = FlowOptions::new(0.05);
        let (u, v) = (mcf_flow(&u0, &opts).unwrap(), mcf_flow(&v0, &opts).unwrap());
        for (fu, fv) in u.frames.iter().zip(&v.frames) {
            let gap_min = fu.u.iter().zip(&fv.u).map(|(p, q)| q - p).fold(f64::INFINITY, f64::min);
            prop_assert!(gap_min >= -1e-12, "t = {}: {gap_min}", fu.t);
        }
    }

    #[test]
    fn newton_residuals_decrease_and_solutions_are_stationary(a in 0.1f64..0.6, b in -0.6f64..0.6) {
        let data = GraphFunction::from_fn(grid(), |x, y| a * (x * x - y * y) + b * x * y).unwrap();
        let (u, stats) = solve_dirichlet(&data, NewtonOptions::default()).unwrap();
        for w in stats.residual_history.windows(2) {
            prop_assert!(w[1] < w[0], "{:?}", stats.residual_history);
        }
        let flowed = mcf_flow(&u, &FlowOptions::new(0.01)).unwrap().last();
        let drift = flowed.u.iter().zip(&u.u).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(drift <= 1e-8, "drift {drift}");
    }

    #[test]
    fn separation_of_a_standard_piece_is_its_pitch(a in -5.0f64..5.0, b in -3.0f64..3.0, c in prop_oneof![-4.0f64..-0.1, 0.1f64..4.0]) {
        let (sector, res) = small_sector();
        let g = build_model(Model::Standard(StandardPiece { a, b, c, r: 2.0 }), sector, res).unwrap();
        let w = separation(&g).unwrap();
        for v in &w.u {
            prop_assert!((v - c).abs() <= 1e-12 * (1.0 + a.abs() + b.abs() + c.abs()) * 8.0);
        }
        prop_assert_eq!(separation_sign(&w), if c > 0.0 { 1 } else { -1 });
        let mirrored = separation(&g.reflect_theta()).unwrap();
        prop_assert_eq!(separation_sign(&mirrored), -separation_sign(&w));
    }

    #[test]
    fn decomposition_is_affine_in_the_model(
        c0 in 0.5f64..3.0,
        a1 in -10.0f64..10.0,
        b1 in -2.0f64..2.0,
        c1 in -0.4f64..2.0,
    ) {
        let (sector, res) = small_sector();
        let base = build_model(Model::Helicoid { c: c0 }, sector, res).unwrap();
        let shifted = MultiGraph::from_fn(sector, res, |rho, theta| {
            c0 * theta / TAU + a1 + b1 * rho.ln() + c1 * theta / TAU
        })
        .unwrap();
        let d0 = cauchy_decompose(&base, 4.0, 1024.0).unwrap();
        let d1 = cauchy_decompose(&shifted, 4.0, 1024.0).unwrap();
        prop_assert!((d1.b - d0.b - b1).abs() <= 1e-8, "b: {} vs {} + {b1}", d1.b, d0.b);
        prop_assert!((d1.c - d0.c - c1).abs() <= 1e-8, "c: {} vs {} + {c1}", d1.c, d0.c);
    }

    #[test]
    fn holomorphic_averages_do_not_drift(
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        k in -3i32..4,
        delta in 0.05f64..0.5,
    ) {
        let a = Complex64::new(re, im);
        let f = AnnulusFunction::from_fn(delta, 4.0, 65, 128, false, |r, t| {
            a * Complex64::from_polar(r, t).powi(k) + Complex64::new(1.0, -2.0)
        })
        .unwrap();
        prop_assert!(average_drift(&f) <= 1e-10 * (1.0 + a.norm() * 4f64.powi(k.abs())));
    }

    #[test]
    fn oscillation_report_is_scale_free(lambda in 0.2f64..5.0, alpha in 0.1f64..2.0) {
        let p = AnnulusPreset::InverseZ { alpha };
        let f = p.sample(0.1, 10.0, 129, 128).unwrap();
        let g = AnnulusFunction::from_fn(0.1 / lambda, 10.0 / lambda, 129, 128, false, |r, t| p.eval(lambda * r, t))
            .unwrap();
        let (rf, rg) = (oscillation_check(&f).unwrap(), oscillation_check(&g).unwrap());
        prop_assert!((rf.eps_hat - rg.eps_hat).abs() <= 1e-9 * rf.eps_hat);
        prop_assert!((rf.osc_proof_c - rg.osc_proof_c).abs() <= 1e-9 * rf.osc_proof_c);
        prop_assert!((rf.osc_min - rg.osc_min).abs() <= 1e-6 * rf.osc_min);
        prop_assert_eq!(rf.holds, rg.holds);
    }
}
