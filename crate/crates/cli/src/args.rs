use std::path::PathBuf;

use aee_core::{GeneratorSpec, StatisticKind};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aee", version, about = "Adjusted Edgeworth expansions for generalized t-statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the symbolic expansion of a statistic.
    Expand(ExpandArgs),
    /// Evaluate truncated expansions at points or invert them at probabilities.
    Eval(EvalArgs),
    /// Scan every truncation for monotonicity and range violations.
    Diagnose(DiagnoseArgs),
    /// Monte Carlo sampling distribution of a statistic.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// Statistic token, e.g. one-unbiased or welch-biased.
    #[arg(long = "test")]
    pub test: StatisticKind,
    /// Number of correction terms K.
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    /// Rewrite over standardized cumulants (ordinary one-sample statistics only).
    #[arg(long)]
    pub lambda_form: bool,
    #[arg(long)]
    pub with_k_table: bool,
    /// Report moment-engine memo entries on stderr.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["data", "moments"])))]
pub struct InputArgs {
    /// CSV file with the (first) sample.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// CSV file with the second sample.
    #[arg(long = "data-y", value_name = "FILE", requires = "data")]
    pub data_y: Option<PathBuf>,
    /// Column of the CSV files: header name or zero-based index.
    #[arg(long)]
    pub col: Option<String>,
    /// Moment specification JSON.
    #[arg(long, value_name = "FILE")]
    pub moments: Option<PathBuf>,
    /// Prior degrees of freedom for moderated statistics.
    #[arg(long, requires = "s02")]
    pub d0: Option<f64>,
    /// Prior variance for moderated statistics.
    #[arg(long, requires = "d0")]
    pub s02: Option<f64>,
    /// Declare the two samples to share one variance (needed by two-pooled).
    #[arg(long)]
    pub equal_variance: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Lower end of the diagnostic grid (default -6 r).
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    /// Upper end of the diagnostic grid (default 6 r).
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("points").required(true).multiple(true).args(["x", "p"])))]
pub struct EvalArgs {
    #[arg(long = "test")]
    pub test: StatisticKind,
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Comma-separated probabilities to invert.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long = "test")]
    pub test: StatisticKind,
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generator: gamma:SHAPE:SCALE[:centered], normal:MEAN:SD or
    /// discrete:X1,X2,...:P1,P2,... with rational probabilities.
    #[arg(long)]
    pub dist: GeneratorSpec,
    #[arg(long = "test")]
    pub test: StatisticKind,
    /// One-sample size.
    #[arg(long, conflicts_with_all = ["nx", "ny"])]
    pub n: Option<u64>,
    #[arg(long, requires = "ny")]
    pub nx: Option<u64>,
    #[arg(long, requires = "nx")]
    pub ny: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, requires = "s02")]
    pub d0: Option<f64>,
    #[arg(long, requires = "d0")]
    pub s02: Option<f64>,
    /// Evaluate the expansion with the generator's exact moments and
    /// tabulate deviations from the empirical CDF.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    /// Comparison points (default -3 to 3 in steps of 0.5).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Write the sorted statistics as CSV.
    #[arg(long, value_name = "FILE")]
    pub dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
