use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "depcov",
    version,
    about = "Distance covariance and correlation under generalized norms",
    after_help = "Exit codes: 0 success, 1 other failure, 2 usage, 3 parse, 4 dimension, \
                  5 distribution, 6 configuration, 7 file access."
)]
pub struct Cli {
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true, env = "DEPCOV_THREADS", value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample distance covariance and correlation of a paired sample.
    Compute(ComputeArgs),
    /// Permutation test of independence.
    Test(TestArgs),
    /// Exact population values for a finite joint law, with cross-checks.
    Oracle(OracleArgs),
    /// Simulate a functional or l2 dataset with a manifest.
    Simulate(SimulateArgs),
    /// Rejection rates of the permutation test across norm pairs.
    Power(PowerArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// How rows of the sample files are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Each row is a vector.
    Vectors,
    /// Each row is a function tabulated on the basis grid; embedded with
    /// `--basis` at truncation `--trunc`.
    Functional,
    /// Each row is a long coordinate vector; truncated to `--trunc`
    /// coordinates.
    Ell2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Statistic {
    #[value(name = "v_n")]
    #[serde(rename = "v_n")]
    Covariance,
    #[value(name = "r_n")]
    #[serde(rename = "r_n")]
    Correlation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZArg {
    Rademacher,
    #[value(name = "standard_gaussian")]
    StandardGaussian,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["x", "paired"])))]
pub struct SampleArgs {
    /// Sample file for X, one observation per row.
    #[arg(long, value_name = "FILE", requires = "y")]
    pub x: Option<PathBuf>,
    /// Sample file for Y, one observation per row.
    #[arg(long, value_name = "FILE", requires = "x")]
    pub y: Option<PathBuf>,
    /// Single file with X and Y columns side by side.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["x", "y"])]
    pub paired: Option<PathBuf>,
    /// Number of X columns in a paired file without an x1..xp,y1..yq header.
    #[arg(long, value_name = "P")]
    pub x_dim: Option<usize>,
    #[arg(long, value_enum, default_value_t = Layout::Vectors)]
    pub layout: Layout,
    /// Truncation level for functional and l2 layouts.
    #[arg(long, value_name = "M")]
    pub trunc: Option<usize>,
    /// Basis for the functional layout: fourier, monomial, or a basis file.
    #[arg(long, default_value = "fourier")]
    pub basis: String,
    /// Norm on X: euclidean, diag:w1,w2,..., or a square CSV matrix file.
    #[arg(long, value_name = "SPEC")]
    pub norm_x: Option<String>,
    /// Norm on Y, as for --norm-x.
    #[arg(long, value_name = "SPEC")]
    pub norm_y: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Number of permutation replicates.
    #[arg(long = "B", value_name = "B", default_value_t = depcov::inference::DEFAULT_REPLICATES)]
    pub b: usize,
    #[arg(long, default_value_t = depcov::inference::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Statistic::Covariance)]
    pub statistic: Statistic,
    /// Seed for all randomness; drawn from system entropy when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Joint law as JSON: {"atoms": [{"x": [..], "y": [..], "p": ..}, ..]}.
    #[arg(long, value_name = "FILE")]
    pub joint: PathBuf,
    #[arg(long, value_name = "SPEC")]
    pub norm_x: Option<String>,
    #[arg(long, value_name = "SPEC")]
    pub norm_y: Option<String>,
    /// Half-width T of the characteristic-function integration square.
    #[arg(long, default_value_t = 200.0)]
    pub cf_truncation: f64,
    /// Cell width h of the characteristic-function quadrature.
    #[arg(long, default_value_t = 0.05)]
    pub cf_step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory receiving x.csv, y.csv and manifest.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Re-run the configuration recorded in a manifest.
    #[arg(long, value_name = "FILE", conflicts_with_all = [
        "basis", "grid", "lambdas", "n", "z", "shared", "noise_sd", "layout", "seed"
    ])]
    pub from_manifest: Option<PathBuf>,
    /// fourier, monomial, or a basis file.
    #[arg(long)]
    pub basis: Option<String>,
    /// Grid points for the built-in bases.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Comma-separated lambdas, or geometric:RATIO:COUNT.
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub z: Option<ZArg>,
    /// Leading latent coordinates shared between X and Y.
    #[arg(long)]
    pub shared: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// functional writes tabulated functions; ell2 writes coefficient vectors.
    #[arg(long, value_enum)]
    pub layout: Option<Layout>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioArg {
    /// Independent Gaussian vectors.
    Null,
    /// Y = X.
    Identity,
    /// Dependence only through the first coordinate, Y1 = X1 + noise.
    Coordinate,
    /// Fourier-basis functions with shared leading scores.
    Functional,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::Null)]
    pub scenario: ScenarioArg,
    /// Dimension of X and Y for the vector scenarios.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Noise on the shared coordinates (coordinate and functional).
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    /// Shared leading scores (functional).
    #[arg(long, default_value_t = 1)]
    pub shared: usize,
    /// Grid points (functional).
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Lambdas (functional), as for simulate.
    #[arg(long, default_value = "geometric:0.5:20")]
    pub lambdas: String,
    /// Truncation (functional).
    #[arg(long, default_value_t = 10)]
    pub trunc: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long = "B", value_name = "B", default_value_t = depcov::inference::DEFAULT_REPLICATES)]
    pub b: usize,
    #[arg(long, default_value_t = 200)]
    pub replications: usize,
    #[arg(long, default_value_t = depcov::inference::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Coverage of the Clopper-Pearson intervals.
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    #[arg(long, value_enum, default_value_t = Statistic::Covariance)]
    pub statistic: Statistic,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Norms on X, one per norm pair (repeatable).
    #[arg(long, value_name = "SPEC")]
    pub norm_x: Vec<String>,
    /// Norms on Y, one per norm pair (repeatable).
    #[arg(long, value_name = "SPEC")]
    pub norm_y: Vec<String>,
    /// Weights w giving norm pairs diag(w, 1, ..., 1) on both sides.
    #[arg(long, value_name = "W1,W2,...", conflicts_with_all = ["norm_x", "norm_y"])]
    pub first_weights: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}
