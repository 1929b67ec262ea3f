use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rlasso_core::simulation::XOutlierCells;
use rlasso_core::{Method, ScenarioKind, SelectionRule};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "rlasso",
    version,
    about = "OLS, LASSO and their equality-restricted variants for linear models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one estimator to a CSV data set.
    Fit(FitArgs),
    /// Cross-validate λ for the LASSO or restricted LASSO.
    Cv(CvArgs),
    /// Run the Monte-Carlo comparison of the four estimators.
    Simulate(SimulateArgs),
    /// Run the four estimators on the built-in R&D expenditure data.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ols,
    Rols,
    Lasso,
    Rlasso,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ols => Method::Ols,
            MethodArg::Rols => Method::RestrictedOls,
            MethodArg::Lasso => Method::Lasso,
            MethodArg::Rlasso => Method::RestrictedLasso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenalizedMethodArg {
    Lasso,
    Rlasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CvRuleArg {
    /// λ with the smallest mean CV error.
    Min,
    /// Largest λ within one standard error of the minimum.
    #[default]
    #[value(name = "1se")]
    OneSe,
}

impl From<CvRuleArg> for SelectionRule {
    fn from(r: CvRuleArg) -> Self {
        match r {
            CvRuleArg::Min => SelectionRule::MinError,
            CvRuleArg::OneSe => SelectionRule::OneStandardError,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum XOutliersArg {
    /// One randomly chosen predictor per contaminated row.
    #[default]
    Cell,
    /// Every predictor of a contaminated row.
    Row,
}

impl From<XOutliersArg> for XOutlierCells {
    fn from(x: XOutliersArg) -> Self {
        match x {
            XOutliersArg::Cell => XOutlierCells::SingleCell,
            XOutliersArg::Row => XOutlierCells::WholeRow,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column name.
    #[arg(long)]
    pub target: String,
    /// Prepend a column of ones named b1_intercept.
    #[arg(long)]
    pub intercept: bool,
    /// Leave the intercept coefficient unpenalized (requires --intercept).
    #[arg(long, requires = "intercept")]
    pub no_penalize_intercept: bool,
}

#[derive(Debug, Args)]
pub struct CvControl {
    #[arg(long, default_value_t = rlasso_core::cv::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Seed of the fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = CvRuleArg::default())]
    pub cv_rule: CvRuleArg,
    #[arg(long, default_value_t = rlasso_core::cv::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Restriction file, one equation such as `b2 = b4` per line.
    #[arg(long)]
    pub restrictions: Option<PathBuf>,
    /// Fixed penalty λ.
    #[arg(long, conflicts_with = "cv")]
    pub lambda: Option<f64>,
    /// Choose λ by cross-validation (the default for penalized methods).
    #[arg(long)]
    pub cv: bool,
    #[command(flatten)]
    pub cv_control: CvControl,
    #[arg(long, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub method: PenalizedMethodArg,
    #[arg(long)]
    pub restrictions: Option<PathBuf>,
    #[command(flatten)]
    pub cv_control: CvControl,
    #[arg(long, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// normal, t3, outlier-y or outlier-x.
    #[arg(long)]
    pub scenario: ScenarioKind,
    /// Sample sizes, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_value = "50,100,200")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = rlasso_core::cv::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = rlasso_core::cv::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, value_enum, default_value_t = CvRuleArg::default())]
    pub cv_rule: CvRuleArg,
    /// Which predictor cells an x-direction outlier replaces.
    #[arg(long, value_enum, default_value_t = XOutliersArg::default())]
    pub x_outliers: XOutliersArg,
    /// Magnitude below which an estimate counts as zero.
    #[arg(long, default_value_t = rlasso_core::simulation::DEFAULT_TAU)]
    pub tau: f64,
    /// Worker threads for the replications (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write every replication's coefficients to this CSV file.
    #[arg(long)]
    pub dump_estimates: Option<PathBuf>,
    #[arg(long, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value_t = crate::example::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = rlasso_core::cv::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, value_enum, default_value_t = CvRuleArg::default())]
    pub cv_rule: CvRuleArg,
    /// Apply the L1 penalty to the intercept as well.
    #[arg(long, overrides_with = "no_penalize_intercept")]
    pub penalize_intercept: bool,
    /// Leave the intercept unpenalized (the default).
    #[arg(long, overrides_with = "penalize_intercept")]
    pub no_penalize_intercept: bool,
    #[arg(long, default_value_t = Format::Table)]
    pub format: Format,
}
