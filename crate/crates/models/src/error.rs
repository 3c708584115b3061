use maad_core::CoreError;
use maad_dataio::DataError;
use maad_diffcalc::DiffError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0} has no trainable parameters")]
    NotTrainable(&'static str),
    #[error("objective {objective} cannot be paired with architecture {architecture}")]
    InvalidPairing { architecture: &'static str, objective: &'static str },
    #[error("deep SVDD center has not been initialized")]
    CenterUninitialized,
    #[error("no training windows")]
    EmptyTrainingSet,
    #[error("no lane within {radius} m of the target")]
    EmptyMap { radius: f64 },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("invalid training configuration: {0}")]
    BadConfig(String),
    #[error("checkpoint is malformed: {0}")]
    BadCheckpoint(String),
    #[error("training diverged at epoch {epoch}: non-finite {what}")]
    Diverged { epoch: usize, what: &'static str },
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Data(#[from] DataError),
}
