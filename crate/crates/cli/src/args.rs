//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcorr::inference::{NullStatistic, Pairing, ScanStatistic};
use qcorr::timeseries::Transform;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "qcorr",
    version,
    about = "Quantile-conditional covariance, correlation and independence tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional moments of two columns for one split pair.
    Ccor(CcorArgs),
    /// Conditional correlation matrix of several columns on a quantile box.
    Cmatrix(CmatrixArgs),
    /// Conditional autocorrelation table, with an optional lag-pair dump.
    Cacf(CacfArgs),
    /// Conditional statistic over a grid of quantile splits.
    Scan(ScanArgs),
    /// Closed-form covariance grids for the (X, W·X) example.
    AnalyticDemo(AnalyticDemoArgs),
    /// Monte-Carlo calibrated independence test.
    McTest(McTestArgs),
    /// Write synthetic data as CSV.
    Simulate(SimulateArgs),
    /// Conditional correlation of random projections of two column groups.
    Project(ProjectArgs),
    /// Recursive projection probe over leading columns.
    Recursive(RecursiveArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// Comma-separated column names.
    #[arg(long, value_delimiter = ',')]
    pub cols: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SpearmanArg {
    /// Pseudo-observations from ranks over the whole sample.
    #[default]
    Global,
    /// Ranks recomputed among the members.
    Within,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum RankingArg {
    /// Rank the current and lagged coordinates separately.
    #[default]
    Pair,
    /// Rank the whole series once.
    Whole,
}

#[derive(Debug, Args)]
pub struct CcorArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, num_args = 4, value_names = ["P1", "Q1", "P2", "Q2"], allow_negative_numbers = true)]
    pub split: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value_t = SpearmanArg::Global)]
    pub spearman: SpearmanArg,
}

#[derive(Debug, Args)]
pub struct CmatrixArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// `P Q` for every column, or one `P Q` pair per column.
    #[arg(long, num_args = 2.., value_names = ["P", "Q"], allow_negative_numbers = true)]
    pub split: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct CacfArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Largest lag.
    #[arg(long, default_value_t = 10)]
    pub lags: usize,

    /// Splits of the current and the lagged value.
    #[arg(long, num_args = 4, value_names = ["P1", "Q1", "P2", "Q2"], allow_negative_numbers = true)]
    pub split: Option<Vec<f64>>,

    /// identity, absolute or square.
    #[arg(long, default_value = "identity")]
    pub transform: Transform,

    #[arg(long, value_enum, default_value_t = RankingArg::Pair)]
    pub ranking: RankingArg,

    /// Also write every lag pair with its membership flag to this file.
    #[arg(long)]
    pub pairs_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Axes such as `p1=0.2:0.8:13,q1=0.2:0.8:13,p2=0.5,q2=0.8`.
    #[arg(long)]
    pub grid: String,

    /// cov, corr or spearman.
    #[arg(long, default_value = "cov")]
    pub statistic: ScanStatistic,
}

#[derive(Debug, Args)]
pub struct AnalyticDemoArgs {
    /// Points per varying axis.
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct McTestArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Split applied to both coordinates: `P Q`.
    #[arg(long, num_args = 2..=4, value_names = ["P", "Q"], allow_negative_numbers = true)]
    pub split: Option<Vec<f64>>,

    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,

    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    /// corr, spearman or abs_corr.
    #[arg(long, default_value = "corr")]
    pub statistic: NullStatistic,

    /// lag1-series (one column) or iid-pairs (two columns); inferred from
    /// `--cols` when omitted.
    #[arg(long)]
    pub pairing: Option<Pairing>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// iid-normal, rademacher-product, gaussian-pair, student-t or ar1.
    pub family: String,

    #[arg(long)]
    pub n: usize,

    /// Dimension, rho, nu or phi depending on the family.
    #[arg(long, allow_negative_numbers = true)]
    pub param: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,

    /// Columns of the first group.
    #[arg(long, value_delimiter = ',', required = true)]
    pub cols: Vec<String>,

    /// Columns of the second group.
    #[arg(long, value_delimiter = ',', required = true)]
    pub cols_y: Vec<String>,

    #[arg(long, num_args = 4, value_names = ["P1", "Q1", "P2", "Q2"], allow_negative_numbers = true)]
    pub split: Option<Vec<f64>>,

    /// Number of random direction pairs.
    #[arg(long, default_value_t = 100)]
    pub directions: usize,

    /// Fixed direction for the first group (with `--dir-y`).
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        requires = "dir_y"
    )]
    pub dir_x: Option<Vec<f64>>,

    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        requires = "dir_x"
    )]
    pub dir_y: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct RecursiveArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Split applied to both coordinates: `P Q`.
    #[arg(long, num_args = 2, value_names = ["P", "Q"], allow_negative_numbers = true)]
    pub split: Option<Vec<f64>>,

    /// Random directions per level.
    #[arg(long, default_value_t = 100)]
    pub directions: usize,
}
