use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "minsurf", version, about = "Numerical laboratory for minimal surfaces and their estimates")]
pub struct Cli {
    /// JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a Weierstrass preset (or JSON data) and write an OBJ mesh.
    Generate(GenerateArgs),
    /// Solve the minimal surface equation with Dirichlet data from a CSV.
    Solve(SolveArgs),
    /// Run graph mean curvature flow from a CSV.
    Flow(FlowArgs),
    /// Density ratios of an OBJ mesh around a point.
    Density(DensityArgs),
    /// Decompose a multi-valued graph model into a standard piece.
    Decompose(DecomposeArgs),
    /// Oscillation, energy or slit checks on an annulus.
    Annulus(AnnulusArgs),
    /// Harmonic polynomial dimensions, cone degrees and sublevel fractions.
    Spectra(SpectraArgs),
    /// Width trajectory and extinction bound under Ricci flow.
    Width(WidthArgs),
    /// Run the acceptance suite and emit a report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// catenoid, helicoid or enneper
    #[arg(long, required_unless_present = "data", conflicts_with = "data")]
    pub preset: Option<String>,
    /// Weierstrass data as JSON ({domain, g, phi, base}).
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Grid size NxM.
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    /// Gauss nodes per quadrature piece.
    #[arg(long, default_value_t = 8)]
    pub quad_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write `s,t,x,y,z,H,K,A2`.
    #[arg(long, value_name = "FILE")]
    pub curvature: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// `x,y,u` on a full grid; only boundary values are used.
    #[arg(long)]
    pub boundary: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// `x,y,u` initial graph; boundary values stay fixed.
    #[arg(long)]
    pub init: PathBuf,
    /// Final time.
    #[arg(long = "T")]
    pub t_end: f64,
    /// `auto` or a step size.
    #[arg(long, default_value = "auto")]
    pub dt: String,
    /// Trace CSV `t,sup_du,sup_A2,gauss_density`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Final graph as `x,y,u`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Gaussian density probe `x,y,z,t0`.
    #[arg(long, value_delimiter = ',')]
    pub probe: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// OBJ written by `generate`.
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,0,0")]
    pub center: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    /// CSV `s,theta,clipped`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Helicoid,
    Catenoid,
    Slab,
    Standard,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// `r1,r2,theta1,theta2`
    #[arg(long, value_delimiter = ',', default_value = "1,64,-3.14159265358979,9.42477796076938")]
    pub sector: Vec<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub r1: f64,
    #[arg(long = "R", default_value_t = 4096.0)]
    pub big_r: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    /// Radial nodes and angular nodes per turn.
    #[arg(long, value_delimiter = ',', default_value = "193,128")]
    pub grid: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnnulusCheck {
    Osc,
    Energy,
    Slit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnnulusFn {
    Constant,
    InverseZ,
    Affine,
    Power,
    LogHarmonic,
    HelicoidGradient,
    SlitPower,
}

#[derive(Debug, Args)]
pub struct AnnulusArgs {
    #[arg(long, value_enum)]
    pub check: AnnulusCheck,
    #[arg(long = "fn", value_enum)]
    pub function: AnnulusFn,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Complex constant `re,im` (helicoid-gradient uses the real part).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub c: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub a: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub b: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub k: i32,
    /// Preset parameter ε, and the slit hypothesis ε when `--slit-eps` is absent.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub slit_eps: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Outer radius; for `energy` also the scale R of the window `e^{±t}√R`.
    #[arg(long = "R", default_value_t = 10.0)]
    pub big_r: f64,
    #[arg(long, default_value_t = 401)]
    pub nr: usize,
    #[arg(long, default_value_t = 256)]
    pub ntheta: usize,
    /// Energy window parameter (default ln 2).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectraAction {
    Dims,
    Growth,
    Cone,
    Lichnerowicz,
    Sublevel,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[arg(value_enum)]
    pub action: SpectraAction,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub dmax: usize,
    /// Cone link dimension plus one.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, conflicts_with = "lambda")]
    pub p: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5")]
    pub eps: Vec<f64>,
    /// Frequency m of sin(m x).
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Cells per axis.
    #[arg(long, default_value_t = 2000)]
    pub cells: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WidthAction {
    Trajectory,
    Extinct,
    Scalar,
    Area,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    #[arg(value_enum, default_value = "trajectory")]
    pub action: WidthAction,
    #[arg(long = "W0", default_value_t = 100.0)]
    pub w0: f64,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// End time of the trajectory (default: extinction bound).
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[arg(long = "minR0", default_value_t = -1.0)]
    pub min_r0: f64,
    #[arg(long = "minR", default_value_t = 0.0)]
    pub min_r: f64,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 4.0 * std::f64::consts::PI)]
    pub area: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all` or a comma-separated list of criterion numbers.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
