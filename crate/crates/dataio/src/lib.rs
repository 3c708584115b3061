//! Stable on-disk formats.
//!
//! * `<scene_id>.csv`: one row per observation, columns
//!   `TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,Y` as in the Argoverse motion
//!   forecasting release (`CITY_NAME` is accepted and ignored).
//! * `<scene_id>.map.json`: lane graph.
//! * `<scene_id>.labels.json`: frame-wise labels of test scenes.
//! * `<scene_id>.scores.csv`: `frame,score` rows.
//! * checkpoints: a JSON header followed by little-endian `f64` parameters.

mod checkpoint;
mod error;
mod labels;
mod scene_csv;
mod scores;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointHeader, FORMAT_VERSION};
pub use error::DataError;
pub use labels::{read_labels, read_lane_graph, write_labels, write_lane_graph};
pub use scene_csv::{list_scene_ids, read_scene, read_scene_by_id, write_scene, ScenePaths};
pub use scores::{read_scores, scores_path, write_scores};

pub type Result<T> = std::result::Result<T, DataError>;

use std::path::{Path, PathBuf};

pub fn csv_path(dir: &Path, scene_id: &str) -> PathBuf {
    dir.join(format!("{scene_id}.csv"))
}

pub fn map_path(dir: &Path, scene_id: &str) -> PathBuf {
    dir.join(format!("{scene_id}.map.json"))
}

pub fn labels_path(dir: &Path, scene_id: &str) -> PathBuf {
    dir.join(format!("{scene_id}.labels.json"))
}
