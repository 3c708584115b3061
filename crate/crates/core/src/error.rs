use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("frame {frame} out of range: windows need 15 <= end_frame < {len}")]
    FrameOutOfRange { frame: usize, len: usize },
    #[error("scene has no TARGET trajectory")]
    MissingTarget,
    #[error("target agent has no observation at frame {0}")]
    TargetAbsent(usize),
    #[error("scene has {0} frames, at least 16 are required")]
    SceneTooShort(usize),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid lane graph: {0}")]
    InvalidLaneGraph(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("unknown subclass `{0}`")]
    UnknownSubclass(String),
}
