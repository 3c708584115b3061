//! Sliding-window scoring of test scenes and the four benchmark metrics.
//!
//! Every frame from 15 on is scored from the 16-frame window ending at it.
//! Frames labeled IGNORE are dropped; ABNORMAL frames are the positive class
//! of AUROC, FPR at 95 % TPR and AUPR-Abnormal, NORMAL frames that of
//! AUPR-Normal.

mod metrics;
mod report;
mod scoring;

pub use metrics::{aupr, auroc, best_f1_threshold, fpr_at_95_tpr, pr_curve, roc_curve, Pair, Positive};
pub use report::{collect, evaluate, evaluate_dirs, report, write_report, Collected, Counts, MetricsReport, SubclassRecall};
pub use scoring::{score_scene, score_scenes, ScoreSeries, Scorer};

use maad_core::CoreError;
use maad_dataio::DataError;
use maad_models::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("metric needs both classes, got {positives} positive and {negatives} negative frames")]
    SingleClass { positives: usize, negatives: usize },
    #[error("no positive frames")]
    NoPositives,
    #[error("scene {scene}: frame {frame} is scored but has no label")]
    MissingLabel { scene: String, frame: usize },
    #[error("scene {scene} has scores but no labels file")]
    MissingLabels { scene: String },
    #[error("scene {scene}: non-finite score at frame {frame}")]
    NonFiniteScore { scene: String, frame: usize },
    #[error("no score files in {0}")]
    NoScores(std::path::PathBuf),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
