use std::fs;
use std::path::Path;

use maad_core::{FrameLabel, LabelCategory, LaneGraph, Subclass};
use serde::{Deserialize, Serialize};

use crate::{DataError, Result};

#[derive(Serialize, Deserialize)]
struct LabelRecord {
    frame: usize,
    category: LabelCategory,
    /// Empty for ignore frames.
    subclass: String,
}

pub fn write_labels(labels: &[FrameLabel], path: &Path) -> Result<()> {
    let records: Vec<LabelRecord> = labels
        .iter()
        .map(|l| LabelRecord {
            frame: l.frame_index,
            category: l.category,
            subclass: l.subclass.map(|s| s.name().to_string()).unwrap_or_default(),
        })
        .collect();
    let body = serde_json::to_string_pretty(&records).map_err(|e| DataError::json(path, e))?;
    fs::write(path, body + "\n").map_err(|e| DataError::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<FrameLabel>> {
    let body = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let records: Vec<LabelRecord> = serde_json::from_str(&body).map_err(|e| DataError::json(path, e))?;
    records
        .into_iter()
        .map(|r| {
            let subclass = if r.subclass.is_empty() { None } else { Some(r.subclass.parse::<Subclass>()?) };
            Ok(FrameLabel::new(r.frame, r.category, subclass)?)
        })
        .collect()
}

pub fn write_lane_graph(graph: &LaneGraph, path: &Path) -> Result<()> {
    let body = serde_json::to_string(graph).map_err(|e| DataError::json(path, e))?;
    fs::write(path, body + "\n").map_err(|e| DataError::io(path, e))
}

pub fn read_lane_graph(path: &Path) -> Result<LaneGraph> {
    let body = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let graph: LaneGraph = serde_json::from_str(&body).map_err(|e| DataError::json(path, e))?;
    graph.validate()?;
    Ok(graph)
}
