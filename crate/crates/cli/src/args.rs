use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use lxdr_core::{DrKind, Generator};

#[derive(Debug, Parser)]
#[command(
    name = "lxdr",
    version,
    about = "Fit dimensionality reducers and explain them with local linear surrogates"
)]
pub struct Cli {
    /// Seed for every random choice (autoencoder init, perturbation, subsampling)
    #[arg(long, global = true, env = "LXDR_SEED", default_value_t = 42)]
    pub seed: u64,

    /// Write the artifact here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a reducer and write it as a JSON model document
    Fit(FitArgs),
    /// Explain a fitted reducer around one instance
    Explain(ExplainArgs),
    /// Run an evaluation suite and write its CSV report
    Eval(EvalArgs),
    /// Change one feature of an instance and re-project it
    Whatif(WhatifArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Bundled dataset (iris, diabetes, digits) or a path to a CSV file
    #[arg(long)]
    pub data: String,

    /// The CSV file has no header line
    #[arg(long)]
    pub no_header: bool,

    /// Target column of a CSV file: `last`, a 0-based index or a header name.
    /// Bundled datasets always use their last column.
    #[arg(long)]
    pub target: Option<String>,

    /// Scale every feature to zero mean and unit variance after loading
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Pca,
    #[value(alias = "kpca-rbf")]
    Kpca,
    #[value(alias = "autoencoder")]
    Ae,
}

impl From<Method> for DrKind {
    fn from(m: Method) -> Self {
        match m {
            Method::Pca => DrKind::Pca,
            Method::Kpca => DrKind::KpcaRbf,
            Method::Ae => DrKind::Autoencoder,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("size").required(true).args(["components", "variance"])))]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, value_enum)]
    pub method: Method,

    /// Number of reduced dimensions
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub components: Option<u64>,

    /// Smallest dimension whose PCA cumulative variance ratio reaches this share
    #[arg(long, value_parser = parse_unit_fraction)]
    pub variance: Option<f64>,

    /// RBF width for kpca (default 1 / number of features)
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Training epochs for ae
    #[arg(long, default_value_t = lxdr_core::FitParams::DEFAULT_EPOCHS)]
    pub epochs: usize,

    /// Also fit a ridge regressor from the reduced data to the target and
    /// write it here
    #[arg(long)]
    pub predictor_out: Option<PathBuf>,

    /// Ridge penalty of the regressor written by --predictor-out
    #[arg(long, default_value_t = 1.0)]
    pub predictor_alpha: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Ng {
    Knn,
    #[value(alias = "perturbation", alias = "lime")]
    Perturb,
}

impl From<Ng> for Generator {
    fn from(ng: Ng) -> Self {
        match ng {
            Ng::Knn => Generator::Knn,
            Ng::Perturb => Generator::Perturbation,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelInput {
    /// Model document written by `lxdr fit`
    #[arg(long)]
    pub model: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    /// Row index into --data, or an inline comma-separated feature vector
    /// (a single-feature vector needs a trailing comma)
    #[arg(long, allow_hyphen_values = true)]
    pub instance: String,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub input: ModelInput,

    #[arg(long, value_enum, default_value_t = Ng::Knn)]
    pub ng: Ng,

    /// Neighborhood size (default 10% of the dataset rows)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,

    /// Pick the ridge penalty on a held-out part of the neighborhood
    #[arg(long)]
    pub auto_alpha: bool,

    /// Ridge penalty, or the fallback when auto-alpha cannot split
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Perturbation spread as a multiple of each feature's std
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Also report the distance between the slopes and the PCA model's own
    /// component weights
    #[arg(long)]
    pub reference_pca: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Tables,
    Scaling,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,

    /// Reducers for the tables suite
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Pca, Method::Kpca, Method::Ae])]
    pub methods: Vec<Method>,

    /// Restrict the tables suite to these datasets
    #[arg(long, value_delimiter = ',', value_parser = ["iris", "diabetes", "digits"])]
    pub datasets: Vec<String>,

    /// Feature counts for the scaling suite (default 10, 20, ..., 250)
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<usize>,

    /// Neighborhood sizes for the scaling suite (default 250, 500, 750)
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,

    /// Query rows per synthetic dataset
    #[arg(long, default_value_t = 20)]
    pub queries: usize,

    /// Autoencoder training epochs
    #[arg(long, default_value_t = lxdr_core::FitParams::DEFAULT_EPOCHS)]
    pub epochs: usize,

    /// Leave the timing column empty so reports are byte-identical across runs
    #[arg(long)]
    pub no_timing: bool,

    /// Run every instance on the calling thread
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("new").required(true).args(["value", "to_mean"])))]
pub struct WhatifArgs {
    #[command(flatten)]
    pub input: ModelInput,

    /// 0-based feature index to change
    #[arg(long)]
    pub feature: usize,

    #[arg(long, allow_hyphen_values = true)]
    pub value: Option<f64>,

    /// Set the feature to its mean over --data
    #[arg(long)]
    pub to_mean: bool,

    /// Regressor written by `lxdr fit --predictor-out`; adds predictions
    #[arg(long)]
    pub predictor: Option<PathBuf>,
}

fn parse_unit_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("must be in (0, 1], got {v}"))
    }
}
