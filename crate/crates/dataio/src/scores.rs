use std::fs;
use std::path::{Path, PathBuf};

use crate::{DataError, Result};

pub fn scores_path(dir: &Path, scene_id: &str) -> PathBuf {
    dir.join(format!("{scene_id}.scores.csv"))
}

pub fn write_scores(entries: &[(usize, f64)], path: &Path) -> Result<()> {
    let mut out = String::from("frame,score\n");
    for (frame, score) in entries {
        out.push_str(&format!("{frame},{score}\n"));
    }
    fs::write(path, out).map_err(|e| DataError::io(path, e))
}

pub fn read_scores(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::io(path, io),
        other => DataError::Parse { path: path.to_path_buf(), row: 0, msg: format!("{other:?}") },
    })?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec =
            rec.map_err(|e| DataError::Parse { path: path.to_path_buf(), row: e.position().map_or(0, |p| p.line()), msg: e.to_string() })?;
        let row = rec.position().map_or(0, |p| p.line());
        let bad = |msg: &str| DataError::Parse { path: path.to_path_buf(), row, msg: msg.to_string() };
        let frame = rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad frame"))?;
        let score = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad score"))?;
        out.push((frame, score));
    }
    Ok(out)
}
