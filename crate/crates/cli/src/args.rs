use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Best approximation onto intersections of convex sets by averaged alternating modified
/// reflections, with the classical projection methods for comparison.
#[derive(Debug, Parser)]
#[command(name = "aamr", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a point onto the intersection of the sets in a problem file.
    Solve(SolveArgs),
    /// Principal angles, Friedrichs angle and intersection dimension of two subspaces.
    Angle(AngleArgs),
    /// Run an experiment sweep on random subspace pairs and write CSV/SVG artifacts.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Aamr,
    Drm,
    Map,
    Rap,
    Haugazeau,
    Hlwb,
    Cm,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON problem file.
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value = "aamr")]
    pub method: MethodName,
    /// Averaging weight (AAMR default 0.9, DRM default 0.5; CM uses λ = 2α, default 0.9).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// AAMR reflector weight in (0,1); for CM sets γ = 1/β − 1.
    #[arg(long)]
    pub beta: Option<f64>,
    /// RAP relaxation in (0,2).
    #[arg(long)]
    pub mu: Option<f64>,
    /// CM resolvent parameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Point to project, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    /// Starting iterate for AAMR and CM, comma separated (default: q).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "random_start")]
    pub x0: Option<String>,
    /// Start AAMR or CM from a seeded random point of norm --start-norm.
    #[arg(long)]
    pub random_start: bool,
    #[arg(long, default_value_t = 10.0)]
    pub start_norm: f64,
    /// Known solution for true-error stopping, comma separated. Without it the exact
    /// projection is used when the set family has a closed form, otherwise the step norm.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Stop on the step norm even when a target is available.
    #[arg(long)]
    pub residual: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// ‖x_k‖ above which monotone growth is reported as divergence.
    #[arg(long, default_value_t = 1e6)]
    pub divergence_threshold: f64,
    #[arg(long, env = "AAMR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the per-iteration trace to <out>/trace.csv.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AngleArgs {
    /// JSON problem file holding exactly two subspaces.
    pub problem: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Alpha,
    Beta,
    AngleProfile,
    Rates,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub sweep: Sweep,
    /// Output directory for the artifacts.
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
    #[arg(long, env = "AAMR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker thread cap.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Ambient dimension.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long, default_value_t = 10.0)]
    pub start_norm: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Method roster. alpha: any of aamr, drm, cm. angle-profile: entries such as map,
    /// rap-opt, rap:1.5, drm:0.5, haugazeau, hlwb, aamr:0.9:0.7, cm:0.25.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Angles for the rates sweep (radians).
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 1.0])]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Vec<f64>,
    /// Use α ∈ {0.01, 0.02, …, 1} for the alpha sweep.
    #[arg(long)]
    pub fine_alpha_grid: bool,
    /// β grid: the α-sweep betas for `alpha`, the swept values for `beta`.
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub mu_grid: Vec<f64>,
    /// AAMR α for the angle profile and β sweep.
    #[arg(long, default_value_t = 0.9)]
    pub aamr_alpha: f64,
    #[arg(long, default_value_t = 20)]
    pub angle_bins: usize,
    /// Draw unconstrained random pairs instead of angle-stratified ones.
    #[arg(long)]
    pub random_instances: bool,
}
