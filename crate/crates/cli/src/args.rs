use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Weighted-likelihood Bayesian classification for imbalanced data.
///
/// Exit codes: 0 success, 1 usage error, 2 data error, 3 sampler failure,
/// 4 completed with convergence warnings (R-hat above 1.05).
#[derive(Debug, Parser)]
#[command(name = "wlbayes", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with controlled class imbalance.
    Simulate(SimulateArgs),
    /// Fit a weighted (or unweighted) model and export posterior draws.
    Fit(FitArgs),
    /// Leave-one-out validation with a full metrics report.
    Loo(LooArgs),
    /// Side-by-side comparison of two `loo` runs on the same dataset.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Outcome family: binary | ordinal.
    #[arg(long)]
    pub family: String,
    /// Number of observations.
    #[arg(long)]
    pub n: usize,
    /// Comma-separated class proportions (class 0,1 for binary; 1..K for
    /// ordinal); must sum to 1.
    #[arg(long)]
    pub proportions: String,
    /// Comma-separated true coefficients (default 1.5,-1.5).
    #[arg(long)]
    pub beta: Option<String>,
    /// Category count for ordinal data (default: number of proportions).
    #[arg(long)]
    pub categories: Option<usize>,
    /// RNG seed (all randomness flows from this).
    #[arg(long)]
    pub seed: u64,
    /// Output directory for dataset.csv and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Flags shared by `fit` and `loo`: input schema, model, weighting, sampler.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Input CSV (header row required).
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the outcome column.
    #[arg(long)]
    pub outcome: String,
    /// Comma-separated predictor columns (default: every other numeric
    /// column).
    #[arg(long)]
    pub predictors: Option<String>,
    /// Outcome family: binary | ordinal.
    #[arg(long)]
    pub family: String,
    /// Ordinal category count (default: maximum label in the data).
    #[arg(long)]
    pub categories: Option<usize>,
    /// Weighting mode: none | inverse | explicit.
    #[arg(long, default_value = "inverse")]
    pub weighting: String,
    /// Class proportions for --weighting explicit, e.g. "0=0.9,1=0.1".
    #[arg(long)]
    pub class_proportions: Option<String>,
    /// Prior standard deviation on coefficients.
    #[arg(long, default_value_t = 1.0)]
    pub prior_sd: f64,
    /// Prior standard deviation on the first cutpoint and log-differences.
    #[arg(long, default_value_t = 5.0)]
    pub cutpoint_prior_sd: f64,
    /// Skip predictor standardization.
    #[arg(long)]
    pub no_standardize: bool,
    /// Drop the intercept (binary family).
    #[arg(long)]
    pub no_intercept: bool,
    /// Sampler chains.
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Warmup iterations per chain.
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    /// Post-warmup draws per chain.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Dual-averaging target acceptance rate.
    #[arg(long, default_value_t = 0.8)]
    pub target_accept: f64,
    /// Sampling algorithm: hmc | random-walk.
    #[arg(long, default_value = "hmc")]
    pub algorithm: String,
    /// RNG seed (required; chains and folds derive deterministic substreams).
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct LooArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Decision threshold for binary classification.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Keep full-data weights in every fold instead of recomputing them on
    /// the training fold.
    #[arg(long)]
    pub fixed_weights: bool,
    /// Do not reuse the full-data adapted step size in folds.
    #[arg(long)]
    pub no_reuse_step_size: bool,
    /// Classification rule: median | mean (binary), argmax | latent-median
    /// (ordinal). Defaults: median / argmax.
    #[arg(long)]
    pub rule: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Directory of the first `loo` run.
    #[arg(long)]
    pub a: PathBuf,
    /// Directory of the second `loo` run.
    #[arg(long)]
    pub b: PathBuf,
    /// Label override for the first run (default: its weighting mode).
    #[arg(long)]
    pub label_a: Option<String>,
    /// Label override for the second run.
    #[arg(long)]
    pub label_b: Option<String>,
    /// Output directory for comparison.txt and differences.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}
