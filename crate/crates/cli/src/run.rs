use std::f64::consts::E;
use std::fs;
use std::io::Write;
use std::path::Path;

use minsurf_core::annulus::{
    annulus_energy, oscillation_check, peak_gradient_check, slit_oscillation_check, AnnulusPreset,
};
use minsurf_core::geomcore::Vec3;
use minsurf_core::graphflow::{mcf_flow, solve_dirichlet, DensityProbe, FlowOptions, NewtonOptions};
use minsurf_core::io::{obj_string, read_graph_csv, read_obj, write_csv, write_curvature_csv, write_graph_csv};
use minsurf_core::monotonicity::{density_quadrature_error, density_ratio, monotone_defect, GraphExtent};
use minsurf_core::multigraph::{build_model, fit_standard_piece, Model, Resolution, Sector, StandardPiece};
use minsurf_core::numerics::fmt17;
use minsurf_core::ricciwidth::{
    extinction_bound, minimal_sphere_area_derivative, scalar_lower_bound, width_samples,
};
use minsurf_core::spectra::{
    cone_degree, cone_eigenvalue, dim_harmonic_poly, growth_exponent_fit, lichnerowicz_value,
    sine_sublevel_oracle, sublevel_fraction, torus_samples,
};
use minsurf_core::suite::{run_suite, Check, CRITERIA};
use minsurf_core::weierstrass::{preset_data, Quadrature, WeierstrassData};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::*;
use crate::CliError;

/// Whether every checked inequality held.
pub type Outcome = bool;

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path`, or to stdout without one.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<f64>>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).map_err(failed)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(v).map_err(failed)?;
    buf.push(b'\n');
    Ok(buf)
}

fn arity<T>(flag: &str, v: &[T], allowed: &[usize]) -> Result<(), CliError> {
    if allowed.contains(&v.len()) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{flag} takes {allowed:?} comma-separated values, got {}", v.len())))
    }
}

fn say(line: &str) {
    println!("{line}");
}

pub fn dispatch(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Flow(a) => flow(a),
        Command::Density(a) => density(a),
        Command::Decompose(a) => decompose(a),
        Command::Annulus(a) => annulus(a),
        Command::Spectra(a) => spectra(a),
        Command::Width(a) => width(a),
        Command::Verify(a) => verify(a),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::Usage(format!("grid `{s}` is not NxM")))?;
    let n = a.trim().parse().map_err(|_| CliError::Usage(format!("bad grid size `{a}`")))?;
    let m = b.trim().parse().map_err(|_| CliError::Usage(format!("bad grid size `{b}`")))?;
    Ok((n, m))
}

fn generate(a: GenerateArgs) -> Result<Outcome, CliError> {
    let data: WeierstrassData = match (&a.preset, &a.data) {
        (Some(name), _) => preset_data(name).map_err(input)?,
        (None, Some(path)) => serde_json::from_str(&read(path)?).map_err(input)?,
        (None, None) => return Err(CliError::Usage("need --preset or --data".into())),
    };
    let (ns, nt) = parse_grid(&a.grid)?;
    let q = Quadrature {
        points: a.quad_points,
        ..Quadrature::default()
    };
    let patch = data.make_patch(ns, nt, q).map_err(failed)?;
    emit(a.out.as_deref(), obj_string(&patch).as_bytes())?;
    if let Some(path) = &a.curvature {
        let mut buf = Vec::new();
        write_curvature_csv(&patch, &mut buf).map_err(failed)?;
        emit(Some(path), &buf)?;
    }
    Ok(true)
}

fn solve(a: SolveArgs) -> Result<Outcome, CliError> {
    if !(a.tol > 0.0 && a.tol.is_finite()) || a.max_iter == 0 {
        return Err(CliError::Usage("--tol must be positive and --max-iter at least 1".into()));
    }
    let b = read_graph_csv(&read(&a.boundary)?).map_err(input)?;
    let opts = NewtonOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        ..NewtonOptions::default()
    };
    let (u, stats) = solve_dirichlet(&b, opts).map_err(failed)?;
    let mut buf = Vec::new();
    write_graph_csv(&u, &mut buf).map_err(failed)?;
    emit(a.out.as_deref(), &buf)?;
    if a.out.is_some() {
        say(&format!("iterations {}", stats.iterations));
        say(&format!("max_residual {}", fmt17(stats.max_residual)));
    }
    Ok(true)
}

fn flow(a: FlowArgs) -> Result<Outcome, CliError> {
    let u0 = read_graph_csv(&read(&a.init)?).map_err(input)?;
    let mut opts = FlowOptions::new(a.t_end);
    opts.dt = match a.dt.as_str() {
        "auto" => None,
        s => Some(s.parse().map_err(|_| CliError::Usage(format!("--dt must be `auto` or a number, got `{s}`")))?),
    };
    opts.record_every = a.record_every;
    if let Some(p) = &a.probe {
        arity("probe", p, &[4])?;
        opts.density = Some(DensityProbe {
            center: Vec3::new(p[0], p[1], p[2]),
            t0: p[3],
            extent: GraphExtent::Window,
        });
    }
    let trace = mcf_flow(&u0, &opts).map_err(failed)?;
    if let Some(path) = &a.trace {
        let mut wr = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        wr.write_record(["t", "sup_du", "sup_A2", "gauss_density"]).map_err(io)?;
        for f in &trace.frames {
            let g = f.gauss_density.map(fmt17).unwrap_or_default();
            wr.write_record([fmt17(f.t), fmt17(f.sup_du), fmt17(f.sup_a2), g]).map_err(io)?;
        }
        let buf = wr.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        emit(Some(path), &buf)?;
    }
    let mut buf = Vec::new();
    write_graph_csv(&trace.last(), &mut buf).map_err(failed)?;
    if a.out.is_some() || a.trace.is_none() {
        emit(a.out.as_deref(), &buf)?;
    }
    Ok(true)
}

fn density(a: DensityArgs) -> Result<Outcome, CliError> {
    arity("center", &a.center, &[3])?;
    let patch = read_obj(&read(&a.mesh)?).map_err(input)?;
    let x0 = Vec3::new(a.center[0], a.center[1], a.center[2]);
    let series = density_ratio(&patch, &x0, &a.radii).map_err(input)?;
    let rows = series
        .radii
        .iter()
        .zip(&series.values)
        .zip(&series.clipped)
        .map(|((s, v), c)| vec![*s, *v, f64::from(u8::from(*c))])
        .collect();
    let mut wr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    wr.write_record(["s", "theta", "clipped"]).map_err(io)?;
    for r in rows_iter(rows) {
        wr.write_record(r).map_err(io)?;
    }
    let buf = wr.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    emit(a.out.as_deref(), &buf)?;
    if a.out.is_some() {
        let eps = density_quadrature_error(&series, &patch);
        let defect = monotone_defect(&series.values);
        say(&format!("eps_quad {}", fmt17(eps)));
        say(&format!("monotone_defect {}", fmt17(defect)));
        return Ok(defect >= -eps || series.values.len() < 2);
    }
    Ok(true)
}

/// `s,theta` as numbers, `clipped` as 0/1.
fn rows_iter(rows: Vec<Vec<f64>>) -> impl Iterator<Item = [String; 3]> {
    rows.into_iter()
        .map(|r| [fmt17(r[0]), fmt17(r[1]), format!("{}", r[2] as u8)])
}

#[derive(Serialize)]
struct ResidualNorms {
    sup: f64,
    sup_weighted: f64,
}

#[derive(Serialize)]
struct Diagnostics {
    epsilon_wantit: f64,
    separation_sign: i8,
}

#[derive(Serialize)]
struct DecomposeReport {
    a: f64,
    b: f64,
    c: f64,
    misfit: f64,
    residual_norms: ResidualNorms,
    diagnostics: Diagnostics,
}

fn decompose(a: DecomposeArgs) -> Result<Outcome, CliError> {
    arity("sector", &a.sector, &[4])?;
    arity("grid", &a.grid, &[2])?;
    let model = match a.model {
        ModelName::Helicoid => Model::Helicoid { c: a.c },
        ModelName::Catenoid => Model::CatenoidLog { b: a.b },
        ModelName::Slab => Model::SlabArctan,
        ModelName::Standard => Model::Standard(StandardPiece {
            a: a.a,
            b: a.b,
            c: a.c,
            r: 1.0,
        }),
    };
    let mut r_lo = a.sector[0];
    if a.model == ModelName::Slab && r_lo <= E {
        // arctan(θ / log ρ) is only sampled where log ρ > 1
        r_lo = E * (1.0 + 1e-6);
        eprintln!("slab model: inner radius raised to {}", fmt17(r_lo));
    }
    let sector = Sector::new(r_lo, a.sector[1], a.sector[2], a.sector[3]).map_err(input)?;
    let res = Resolution {
        n_rho: a.grid[0],
        per_turn: a.grid[1],
    };
    let g = build_model(model, sector, res).map_err(input)?;
    let fit = fit_standard_piece(&g, a.r1, a.mu, a.big_r).map_err(failed)?;
    let d = &fit.decomposition;
    let report = DecomposeReport {
        a: fit.piece.a,
        b: fit.piece.b,
        c: fit.piece.c,
        misfit: fit.misfit,
        residual_norms: ResidualNorms {
            sup: d.residual.sup(),
            sup_weighted: d.residual.sup_weighted(),
        },
        diagnostics: Diagnostics {
            epsilon_wantit: d.epsilon_wantit,
            separation_sign: d.separation_sign,
        },
    };
    emit(a.out.as_deref(), &json_bytes(&report)?)?;
    Ok(true)
}

fn complex(v: &[f64]) -> Complex64 {
    Complex64::new(v[0], v.get(1).copied().unwrap_or(0.0))
}

fn annulus(a: AnnulusArgs) -> Result<Outcome, CliError> {
    arity("c", &a.c, &[1, 2])?;
    arity("a", &a.a, &[1, 2])?;
    arity("b", &a.b, &[1, 2])?;
    let preset = match a.function {
        AnnulusFn::Constant => AnnulusPreset::Constant { c: complex(&a.c) },
        AnnulusFn::InverseZ => AnnulusPreset::InverseZ { alpha: a.alpha },
        AnnulusFn::Affine => AnnulusPreset::Affine {
            a: complex(&a.a),
            b: complex(&a.b),
        },
        AnnulusFn::Power => AnnulusPreset::Power { k: a.k },
        AnnulusFn::LogHarmonic => AnnulusPreset::LogHarmonic { eps: a.eps },
        AnnulusFn::HelicoidGradient => AnnulusPreset::HelicoidGradient { c: a.c[0] },
        AnnulusFn::SlitPower => AnnulusPreset::SlitPower {
            eps: a.eps,
            delta: a.delta,
        },
    };
    let slit = a.check == AnnulusCheck::Slit;
    let f = if slit && !preset.is_slit() {
        let nt = if a.ntheta % 2 == 0 { a.ntheta + 1 } else { a.ntheta };
        minsurf_core::annulus::AnnulusFunction::from_fn(a.delta, a.big_r, a.nr, nt, true, |r, t| preset.eval(r, t))
    } else {
        preset.sample(a.delta, a.big_r, a.nr, a.ntheta)
    }
    .map_err(input)?;
    match a.check {
        AnnulusCheck::Osc => {
            let r = oscillation_check(&f).map_err(failed)?;
            emit(a.out.as_deref(), &json_bytes(&r)?)?;
            Ok(r.holds)
        }
        AnnulusCheck::Energy => {
            let t = a.t.unwrap_or(2f64.ln());
            let e = annulus_energy(&f, a.big_r, t).map_err(failed)?;
            let peak = peak_gradient_check(&f, a.big_r).map_err(failed)?;
            #[derive(Serialize)]
            struct EnergyOut<A, B> {
                energy: A,
                peak_gradient: B,
            }
            emit(a.out.as_deref(), &json_bytes(&EnergyOut { energy: e, peak_gradient: peak })?)?;
            Ok(e.holds && peak.holds)
        }
        AnnulusCheck::Slit => {
            let eps = a.slit_eps.unwrap_or(a.eps);
            let r = slit_oscillation_check(&f, eps).map_err(failed)?;
            emit(a.out.as_deref(), &json_bytes(&r)?)?;
            Ok(r.holds)
        }
    }
}

fn spectra(a: SpectraArgs) -> Result<Outcome, CliError> {
    match a.action {
        SpectraAction::Dims => {
            let mut rows = Vec::new();
            for d in 0..=a.dmax {
                let h = dim_harmonic_poly(a.n, d).map_err(failed)?;
                rows.push([h.d.to_string(), h.value.to_string()]);
            }
            let mut wr = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            wr.write_record(["d", "dim"]).map_err(io)?;
            for r in rows {
                wr.write_record(r).map_err(io)?;
            }
            let buf = wr.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            emit(a.out.as_deref(), &buf)?;
        }
        SpectraAction::Growth => {
            let slope = growth_exponent_fit(a.n, a.dmax).map_err(input)?;
            emit(a.out.as_deref(), format!("{}\n", fmt17(slope)).as_bytes())?;
        }
        SpectraAction::Cone => {
            let c = match (a.p, a.lambda) {
                (Some(p), _) => cone_eigenvalue(a.k, p),
                (None, Some(l)) => cone_degree(a.k, l),
                (None, None) => return Err(CliError::Usage("cone needs --p or --lambda".into())),
            }
            .map_err(input)?;
            emit(a.out.as_deref(), &json_bytes(&c)?)?;
        }
        SpectraAction::Lichnerowicz => {
            let v = lichnerowicz_value(a.n).map_err(input)?;
            emit(a.out.as_deref(), format!("{}\n", fmt17(v)).as_bytes())?;
        }
        SpectraAction::Sublevel => {
            let m = a.m as f64;
            let v = torus_samples(a.cells, 1, |x| (m * x[0]).sin());
            let mut rows = Vec::new();
            for &eps in &a.eps {
                rows.push(vec![eps, sublevel_fraction(&v, eps).map_err(input)?, sine_sublevel_oracle(eps)]);
            }
            emit(a.out.as_deref(), &csv_bytes(&["eps", "fraction", "oracle"], rows)?)?;
        }
    }
    Ok(true)
}

fn width(a: WidthArgs) -> Result<Outcome, CliError> {
    if matches!(a.action, WidthAction::Trajectory | WidthAction::Extinct) && !(a.c > 0.0 && a.w0 >= 0.0) {
        return Err(CliError::Usage("need C > 0 and W0 ≥ 0".into()));
    }
    let line = |v: f64| format!("{}\n", fmt17(v));
    match a.action {
        WidthAction::Trajectory => {
            let t_end = a.t_end.unwrap_or_else(|| extinction_bound(a.w0, a.c));
            let rows = width_samples(a.w0, a.c, t_end, a.samples)
                .into_iter()
                .map(|s| vec![s.t, s.w])
                .collect();
            emit(a.out.as_deref(), &csv_bytes(&["t", "W"], rows)?)?;
        }
        WidthAction::Extinct => emit(a.out.as_deref(), line(extinction_bound(a.w0, a.c)).as_bytes())?,
        WidthAction::Scalar => emit(a.out.as_deref(), line(scalar_lower_bound(a.min_r0, a.n, a.t)).as_bytes())?,
        WidthAction::Area => {
            emit(a.out.as_deref(), line(minimal_sphere_area_derivative(a.area, a.min_r)).as_bytes())?
        }
    }
    Ok(true)
}

fn parse_suite(s: &str) -> Result<Option<Vec<u8>>, CliError> {
    if s.trim() == "all" {
        return Ok(None);
    }
    if s.trim().is_empty() {
        return Ok(Some(Vec::new()));
    }
    s.split(',')
        .map(|t| {
            let n: u8 = t.trim().parse().map_err(|_| CliError::Usage(format!("bad criterion `{t}`")))?;
            if CRITERIA.iter().any(|c| c.0 == n) {
                Ok(n)
            } else {
                Err(CliError::Usage(format!("no criterion {n}")))
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// JSON array or CSV of report entries.
pub fn report_bytes(entries: &[Check], format: ReportFormat) -> Result<Vec<u8>, CliError> {
    match format {
        ReportFormat::Json => json_bytes(&entries),
        ReportFormat::Csv => {
            let mut wr = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            wr.write_record(["id", "paper_ref", "measured", "threshold", "pass"]).map_err(io)?;
            for c in entries {
                wr.write_record([
                    c.id.clone(),
                    c.paper_ref.clone(),
                    fmt17(c.measured),
                    fmt17(c.threshold),
                    c.pass.to_string(),
                ])
                .map_err(io)?;
            }
            wr.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn verify(a: VerifyArgs) -> Result<Outcome, CliError> {
    let selection = parse_suite(&a.suite)?;
    let criteria = run_suite(selection.as_deref());
    for c in &criteria {
        eprintln!("{}", c.summary_line());
    }
    let entries: Vec<Check> = criteria.iter().flat_map(|c| c.checks.iter().cloned()).collect();
    emit(a.out.as_deref(), &report_bytes(&entries, a.format)?)?;
    Ok(entries.iter().all(|c| c.pass))
}
