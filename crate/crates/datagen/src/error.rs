use maad_core::{CoreError, Subclass};
use maad_dataio::DataError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("scene {scene_id}: cannot animate {subclass}: {reason}")]
    InfeasibleScript { scene_id: String, subclass: Subclass, reason: String },
    #[error("invalid dataset config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl DatagenError {
    pub(crate) fn in_scene(self, id: &str) -> Self {
        match self {
            DatagenError::InfeasibleScript { subclass, reason, .. } => {
                DatagenError::InfeasibleScript { scene_id: id.to_string(), subclass, reason }
            }
            other => other,
        }
    }
}
