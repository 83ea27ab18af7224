//! Command-line front end: fit intensities to count files, audit weights,
//! run simulation protocols and coverage checks.
//!
//! Every artifact is a deterministic function of the inputs and seeds.
//! Exit codes: 0 success, 1 I/O, 2 parse, 3 configuration, 4 numerical.

mod coverage;
mod error;
mod fit;
pub mod ingest;
mod simulate;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use coverage::{run_coverage, CoverageConfig};
pub use error::{CliError, CliResult};
pub use fit::{run_fit, run_weights, FitSummary};
pub use simulate::{run_simulate, SimulateOverrides};

use ingest::InputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "poisdict",
    version,
    about = "Sparse Poisson intensity estimation over function dictionaries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a penalized Poisson model; writes fit.json, weights.csv and intensity.csv.
    Fit(FitArgs),
    /// Compute the data-driven weights only; writes weights.csv.
    Weights(FitArgs),
    /// Run a simulation protocol; writes report.csv and plot.csv.
    Simulate(SimulateArgs),
    /// Monte-Carlo check of the weight concentration bounds; writes coverage.csv.
    Coverage(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyKind {
    Lasso,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightMode {
    Hat,
    Tilde,
    Practical,
}

impl From<WeightMode> for poisson_dict::weights::VarianceMode {
    fn from(m: WeightMode) -> Self {
        use poisson_dict::weights::VarianceMode as V;
        match m {
            WeightMode::Hat => V::Hat,
            WeightMode::Tilde => V::Tilde,
            WeightMode::Practical => V::Practical,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Count file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv_position_count")]
    pub format: InputFormat,
    /// Dictionary, e.g. `haar:J=10,db4:J=10,fourier:m=1023,hist:delta=0.125,const`.
    #[arg(long)]
    pub dict: String,
    #[arg(long, value_enum, default_value = "lasso")]
    pub penalty: PenaltyKind,
    /// Group size for `--penalty group`; groups never straddle systems or scales.
    #[arg(long, default_value_t = 2)]
    pub groups: usize,
    #[arg(long, default_value_t = 1.01)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value = "hat")]
    pub weight_mode: WeightMode,
    /// Multiplier (>= 1) applied to the whole penalty.
    #[arg(long, default_value_t = 1.0)]
    pub alpha_mult: f64,
    /// Use this constant weight for every coefficient or group instead of
    /// the data-driven weights.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Accepted for interface uniformity; fitting draws no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Protocol file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub overrides: SimulateOverrides,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    /// Configuration file (TOML); flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dict: Option<String>,
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub alpha_signal: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, value_enum)]
    pub penalty: Option<PenaltyKind>,
    #[arg(long)]
    pub groups: Option<usize>,
    #[arg(long, value_enum)]
    pub weight_mode: Option<WeightMode>,
    /// Intensity bound `M` for group weights; defaults to the true maximum.
    #[arg(long)]
    pub intensity_bound: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => run_fit(&args).map(|_| ()),
        Command::Weights(args) => run_weights(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Coverage(args) => run_coverage(&args),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn finish_csv(mut w: csv::Writer<std::fs::File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `first..last` atom labels of each group; singletons keep their label.
fn group_labels(
    groups: &poisson_dict::dictionary::GroupPartition,
    labels: &[String],
) -> Vec<String> {
    groups
        .iter()
        .map(|g| match (g.first(), g.last()) {
            (Some(&f), Some(&l)) if f == l => labels[f].clone(),
            (Some(&f), Some(&l)) => format!("{}..{}", labels[f], labels[l]),
            _ => String::new(),
        })
        .collect()
}
