//! One-class SVM on frozen auto-encoder features.

mod grid;
mod svm;
mod two_stage;

use maad_dataio::DataError;
use maad_eval::EvalError;
use maad_models::ModelError;
use thiserror::Error;

pub use grid::{default_gammas, grid_search, select_subset, Candidate, GridResult, DEFAULT_NUS};
pub use svm::{fit_ocsvm, fit_ocsvm_with, gaussian_kernel, OcSvmModel, SolverConfig, Standardizer};
pub use two_stage::{TwoStage, OCSVM_TAG};

#[derive(Debug, Error)]
pub enum OneClassError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no training features")]
    EmptyTrainingSet,
    #[error("feature {index} is not finite")]
    NonFinite { index: usize },
    #[error("feature width {found} differs from {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("solver stopped after {iterations} iterations with KKT residual {residual:e}")]
    SolverDivergence { iterations: usize, residual: f64 },
    #[error("labeled subset needs both classes ({positives} abnormal, {negatives} normal)")]
    DegenerateLabels { positives: usize, negatives: usize },
    #[error("bad ocsvm checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, OneClassError>;
