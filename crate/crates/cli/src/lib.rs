//! The `maad` command line: generate, train, score, eval and
//! gridsearch-ocsvm.
//!
//! Every subcommand writes `run_config.json` with its full argument set next
//! to its outputs, so a run directory records exactly what produced it.

mod commands;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use commands::{cmd_eval, cmd_generate, cmd_gridsearch_ocsvm, cmd_score, cmd_train, load_scenes, write_run_config};
pub use error::{CliError, ExitCode, Result, EXIT_IO, EXIT_RUNTIME, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "maad", version, about = "Unsupervised anomaly detection on multi-agent trajectories")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with train, val and test splits.
    Generate(GenerateArgs),
    /// Train an auto-encoder on unlabeled scenes.
    Train(TrainArgs),
    /// Score every frame of every scene in a directory.
    Score(ScoreArgs),
    /// Compute metrics from score and label files.
    Eval(EvalArgs),
    /// Fit a one-class SVM on frozen encoder features with a (gamma, nu) grid search.
    GridsearchOcsvm(GridArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    /// Dataset config as JSON; defaults are used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// seq2seq, stgae or lanegcn_ae.
    #[arg(long)]
    pub model: String,
    /// recon or dsvdd.
    #[arg(long, default_value = "recon")]
    pub objective: String,
    /// Directory of training scenes.
    #[arg(long)]
    pub data: PathBuf,
    /// Directory of validation scenes used for model selection.
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long, default_value_t = 36)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub lr_decayed: f64,
    /// Epochs at `--lr` before switching to `--lr-decayed`.
    #[arg(long, default_value_t = 32)]
    pub decay_after: usize,
    /// Random clips drawn from every training scene per epoch.
    #[arg(long, default_value_t = 1)]
    pub clips_per_scene: usize,
    /// Reconstruction-only epochs before the deep SVDD center is set.
    #[arg(long, default_value_t = 8)]
    pub pretrain_epochs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    /// Trained checkpoint (auto-encoder or ocsvm).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// cvm or lti without a checkpoint; with one, the architecture it must hold.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Trained auto-encoder whose latent code is the SVM feature.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub train_data: PathBuf,
    #[arg(long)]
    pub test_data: PathBuf,
    /// Label directory; defaults to `--test-data`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Fraction of the labeled test frames used to rank candidates.
    #[arg(long, default_value_t = 0.2)]
    pub subset_frac: f64,
    /// Upper bound on training windows fed to the SVM.
    #[arg(long, default_value_t = 2000)]
    pub max_train: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Score(a) => cmd_score(a),
        Command::Eval(a) => cmd_eval(a),
        Command::GridsearchOcsvm(a) => cmd_gridsearch_ocsvm(a),
    }
}
