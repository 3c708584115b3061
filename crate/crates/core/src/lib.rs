//! Core types for unsupervised anomaly detection on multi-agent driving scenes.
//!
//! A [`Scene`] holds frame-aligned trajectories sampled at 10 Hz, a static
//! [`LaneGraph`] and, for test scenes, frame-wise labels. Models never look at
//! a scene directly; they consume [`Window`]s, fixed-length slices expressed in
//! a coordinate frame centred on the target agent.

mod error;
mod scene;
mod taxonomy;
mod window;

pub use error::CoreError;
pub use scene::{AgentRole, AgentState, FrameLabel, LabelCategory, Lane, LaneGraph, LaneId, LaneProjection, Scene, Trajectory};
pub use taxonomy::Subclass;
pub use window::{from_displacements, to_displacements, to_target_frame, window_iter, Pose, Window, WindowAgent};

/// Number of frames in a model input window.
pub const WINDOW_LEN: usize = 16;

/// Sampling period of every trajectory, in seconds.
pub const FRAME_DT: f64 = 0.1;

/// First scene frame that receives an anomaly score.
pub const FIRST_SCORED_FRAME: usize = WINDOW_LEN - 1;

pub type Point = [f64; 2];

pub type Result<T> = std::result::Result<T, CoreError>;
