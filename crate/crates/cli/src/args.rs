//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use uncertainty_importance::synthetic::MeaseVariant;
use uncertainty_importance::{Measure, Metric};

#[derive(Debug, Parser)]
#[command(name = "uqimp", version, about = "Entropy- and likelihood-based feature importance pipelines")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Master seed; each stage derives its own seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset.
    Generate(GenerateArgs),
    /// Fit a model and save it as JSON.
    Train(TrainArgs),
    /// Permutation feature importance for every feature.
    Pfi(PfiArgs),
    /// Partial dependence and ICE curves for one feature.
    Curves(CurvesArgs),
    /// Held-out R² of predicting each feature from the others.
    FeaturePredictability(PredictabilityArgs),
    /// Summarize the files in the output directory.
    Report,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub generator: Generator,

    /// Also write train.csv and test.csv with this share of rows in train.
    #[arg(long, global = true)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Generator {
    /// Binary labels from a thresholded sum of uniform features.
    Mease {
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        d: usize,
        /// Number of informative features.
        #[arg(long, default_value_t = 4)]
        j: usize,
        /// Label noise rate.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// original, copy-informative or copy-uninformative.
        #[arg(long, default_value = "original")]
        variant: MeaseVariant,
    },
    /// Five Gaussian features (two correlated pairs and one independent), linear mean.
    CorrRegression {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Noise standard deviation [default: sqrt(2)].
        #[arg(long, conflicts_with = "noise_variance")]
        noise_sd: Option<f64>,
        /// Noise variance, as an alternative to --noise-sd.
        #[arg(long)]
        noise_variance: Option<f64>,
    },
    /// Two uniform features with a noisy band along the border of a square.
    Border {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        inner: f64,
        #[arg(long, default_value_t = 2.5)]
        outer: f64,
        #[arg(long, default_value_t = 0.1)]
        noise_sd: f64,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(subcommand)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Training CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Target column [default: last column].
    #[arg(long)]
    pub target: Option<String>,
    /// Name of the model file written to the output directory.
    #[arg(long, default_value = "model.json")]
    pub model_file: String,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelArgs {
    /// Exact Gaussian process regression.
    Gp {
        #[command(flatten)]
        #[serde(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1000)]
        epochs: usize,
        /// Adam learning rate.
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long)]
        no_standardize_inputs: bool,
    },
    /// Calibrated random forest classifier.
    Rf {
        #[command(flatten)]
        #[serde(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 500)]
        trees: usize,
        /// Maximum tree depth; 0 means unlimited.
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        /// Features tried per split: sqrt, all, or a count.
        #[arg(long, default_value = "sqrt")]
        max_features: String,
        /// Share of training rows held out for sigmoid calibration.
        #[arg(long, default_value_t = 0.2)]
        calibration_fraction: f64,
        #[arg(long)]
        no_calibration: bool,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct PfiArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Test CSV with the model's feature and target columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated: classic, likelihood, entropy, conditional-entropy.
    #[arg(long, value_delimiter = ',', default_value = "likelihood,entropy")]
    pub measures: Vec<Measure>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Grouping for conditional-entropy: exact, or quantile[:BINS].
    #[arg(long, default_value = "exact")]
    pub grouping: String,
    /// Loss for classic: squared-error or misclassification [default: by task].
    #[arg(long)]
    pub classic_loss: Option<String>,
    /// Skip the SVG chart.
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Feature name or 0-based index.
    #[arg(long)]
    pub feature: String,
    /// mean, entropy or nll.
    #[arg(long, default_value = "entropy")]
    pub metric: Metric,
    /// linear or quantile.
    #[arg(long, default_value = "linear")]
    pub grid: String,
    #[arg(long, default_value_t = uncertainty_importance::curves::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long)]
    pub grid_max: Option<f64>,
    /// Keep at most this many ICE curves (the PDP always uses every row).
    #[arg(long)]
    pub max_curves: Option<usize>,
    /// Class traced by the mean metric on classification [default: 1].
    #[arg(long)]
    pub class: Option<usize>,
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictabilityArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Target column [default: last column].
    #[arg(long)]
    pub target: Option<String>,
    /// Use the target as an extra input.
    #[arg(long)]
    pub include_target: bool,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Share of rows used for fitting; R² is measured on the rest.
    #[arg(long, default_value_t = 0.75)]
    pub train_fraction: f64,
}
