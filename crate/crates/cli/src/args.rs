use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use otcic::estimators::Estimator;
use otcic::ot::RoundingMode;
use otcic::synthetic::MeshKind;

#[derive(Debug, Parser)]
#[command(
    name = "otcic",
    version,
    about = "Changes-in-changes estimation with optimal transport"
)]
pub struct Cli {
    /// Worker threads; 1 forces serial execution.
    #[arg(long, global = true, env = "OTCIC_THREADS")]
    pub threads: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Beta-latent simulation study.
    Simulate(SimulateArgs),
    /// Estimate effects from a generic panel CSV.
    Estimate(EstimateArgs),
    /// Analyses of the fast-food employment survey.
    Ck(CkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Mode,
    Barycentric,
}

impl From<Rounding> for RoundingMode {
    fn from(r: Rounding) -> Self {
        match r {
            Rounding::Mode => RoundingMode::Mode,
            Rounding::Barycentric => RoundingMode::Barycentric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mesh {
    Random,
    Lattice,
}

impl From<Mesh> for MeshKind {
    fn from(m: Mesh) -> Self {
        match m {
            Mesh::Random => MeshKind::Random,
            Mesh::Lattice => MeshKind::Lattice,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON file with any of the configuration fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Units per arm [default: 3000].
    #[arg(long)]
    pub n: Option<usize>,
    /// Production-function parameter in (0, 1) [default: 0.5].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Master seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Repetitions [default: 20].
    #[arg(long)]
    pub runs: Option<usize>,
    /// Points in the eCDF comparison mesh [default: 10000].
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Mesh layout [default: random].
    #[arg(long, value_enum)]
    pub mesh_kind: Option<Mesh>,
    /// Kernel bandwidth for the density grids [default: 0.5].
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Plan-to-map rounding for the transport estimator [default: mode].
    #[arg(long, value_enum)]
    pub rounding: Option<Rounding>,
    #[arg(long, default_value = "otcic-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Did,
    Cic,
    Ot,
}

impl From<Method> for Estimator {
    fn from(m: Method) -> Self {
        match m {
            Method::Did => Estimator::Did,
            Method::Cic => Estimator::Cic,
            Method::Ot => Estimator::OtCic,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Panel CSV with columns id, group, period, y1..yd.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "ot")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "mode")]
    pub rounding: Rounding,
    /// Comma-separated quantile levels in (0, 1) [default: 0.05, 0.10, ..., 0.95].
    #[arg(long, value_delimiter = ',')]
    pub quantiles: Option<Vec<f64>>,
    /// Also write the control transport plan and map.
    #[arg(long)]
    pub dump_plan: bool,
    /// Also couple treated-post outcomes to their counterfactuals.
    #[arg(long)]
    pub couple: bool,
    #[arg(long, default_value = "otcic-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Table2,
    Sweep,
    UnitDrop,
}

#[derive(Debug, Args)]
pub struct CkArgs {
    /// Survey CSV in the documented layout.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "table2")]
    pub analysis: Analysis,
    /// Repetitions for the unit-drop analysis.
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Share of each group removed per unit-drop repetition.
    #[arg(long, default_value_t = 0.2)]
    pub drop_frac: f64,
    /// Keep the all-covariate sample fixed across sweep subsets.
    #[arg(long)]
    pub fixed_sample: bool,
    #[arg(long, value_enum, default_value = "mode")]
    pub rounding: Rounding,
    #[arg(long, default_value = "otcic-out")]
    pub out_dir: PathBuf,
}
