use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use maad_core::{AgentRole, AgentState, LaneGraph, Scene, Trajectory, FRAME_DT};

use crate::{csv_path, labels_path, map_path, read_labels, read_lane_graph, write_labels, write_lane_graph, DataError, Result};

const REQUIRED: [&str; 5] = ["TIMESTAMP", "TRACK_ID", "OBJECT_TYPE", "X", "Y"];
const GRID_TOLERANCE_S: f64 = 1e-3;

/// Files written for one scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenePaths {
    pub csv: PathBuf,
    pub map: PathBuf,
    pub labels: Option<PathBuf>,
}

fn role_from(object_type: &str) -> Option<AgentRole> {
    match object_type {
        "AGENT" => Some(AgentRole::Target),
        "OTHERS" => Some(AgentRole::Other),
        "AV" => Some(AgentRole::Ego),
        _ => None,
    }
}

fn object_type(role: AgentRole) -> &'static str {
    match role {
        AgentRole::Target => "AGENT",
        AgentRole::Other => "OTHERS",
        AgentRole::Ego => "AV",
    }
}

struct Row {
    line: u64,
    timestamp: f64,
    track: String,
    role: AgentRole,
    x: f64,
    y: f64,
}

/// Reads a scene. Trajectories are ordered by first appearance in the file
/// and the scene id is the file stem.
pub fn read_scene(csv_file: &Path, map_file: Option<&Path>, labels_file: Option<&Path>) -> Result<Scene> {
    let parse_err = |row: u64, msg: String| DataError::Parse { path: csv_file.to_path_buf(), row, msg };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(csv_file).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => DataError::io(csv_file, io),
        other => parse_err(0, format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|c| !headers.iter().any(|h| h == *c)).collect();
    if !missing.is_empty() {
        return Err(DataError::Schema { path: csv_file.to_path_buf(), msg: format!("missing columns {missing:?}") });
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (c_t, c_id, c_type, c_x, c_y) = (col("TIMESTAMP"), col("TRACK_ID"), col("OBJECT_TYPE"), col("X"), col("Y"));

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let num = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = field(i).parse().map_err(|_| parse_err(line, format!("{name} `{}` is not a number", field(i))))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("{name} is not finite")))
            }
        };
        let role = role_from(field(c_type)).ok_or_else(|| parse_err(line, format!("unknown OBJECT_TYPE `{}`", field(c_type))))?;
        rows.push(Row {
            line,
            timestamp: num(c_t, "TIMESTAMP")?,
            track: field(c_id).to_string(),
            role,
            x: num(c_x, "X")?,
            y: num(c_y, "Y")?,
        });
    }
    if rows.is_empty() {
        return Err(DataError::Schema { path: csv_file.to_path_buf(), msg: "no observations".into() });
    }
    if let Some(w) = rows.windows(2).find(|w| w[1].timestamp < w[0].timestamp) {
        return Err(parse_err(w[1].line, "rows are not sorted by TIMESTAMP".into()));
    }

    let start_time = rows[0].timestamp;
    let mut order: Vec<(String, AgentRole)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut observations: Vec<Vec<(usize, f64, f64, u64)>> = Vec::new();
    let mut len = 0;
    for row in &rows {
        let offset = (row.timestamp - start_time) / FRAME_DT;
        let frame = offset.round();
        let off_grid = (row.timestamp - start_time - frame * FRAME_DT).abs();
        if off_grid > GRID_TOLERANCE_S {
            return Err(DataError::Grid {
                path: csv_file.to_path_buf(),
                row: row.line,
                timestamp: row.timestamp,
                offset_ms: off_grid * 1e3,
            });
        }
        let frame = frame as usize;
        len = len.max(frame + 1);
        let k = *index.entry(row.track.clone()).or_insert_with(|| {
            order.push((row.track.clone(), row.role));
            observations.push(Vec::new());
            order.len() - 1
        });
        if order[k].1 != row.role {
            return Err(parse_err(row.line, format!("track {} changes OBJECT_TYPE", row.track)));
        }
        observations[k].push((frame, row.x, row.y, row.line));
    }
    let agents = order.iter().filter(|(_, r)| *r == AgentRole::Target).count();
    if agents != 1 {
        return Err(DataError::Schema { path: csv_file.to_path_buf(), msg: format!("expected exactly one AGENT track, found {agents}") });
    }

    let mut trajectories = Vec::with_capacity(order.len());
    for ((id, role), obs) in order.into_iter().zip(observations) {
        let mut states = vec![AgentState::PADDED; len];
        for (frame, x, y, line) in obs {
            if states[frame].valid {
                return Err(parse_err(line, format!("track {id} observed twice at frame {frame}")));
            }
            states[frame] = AgentState::new(x, y);
        }
        trajectories.push(Trajectory::new(id, role, states));
    }

    let lane_graph = match map_file {
        Some(p) => read_lane_graph(p)?,
        None => LaneGraph::empty(),
    };
    let labels = labels_file.map(read_labels).transpose()?;
    let scene_id = csv_file.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    Ok(Scene::new(scene_id, start_time, trajectories, lane_graph, labels)?)
}

/// Reads `<dir>/<scene_id>.csv` plus its map and labels when present.
pub fn read_scene_by_id(dir: &Path, scene_id: &str) -> Result<Scene> {
    let map = map_path(dir, scene_id);
    let labels = labels_path(dir, scene_id);
    read_scene(&csv_path(dir, scene_id), map.exists().then_some(map.as_path()), labels.exists().then_some(labels.as_path()))
}

/// Scene ids (`*.csv` stems, score files excluded) in sorted order.
pub fn list_scene_ids(dir: &Path) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| DataError::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| DataError::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(stem) = name.strip_suffix(".csv") {
            if !stem.ends_with(".scores") {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

/// Writes the scene CSV, its map and (when non-empty) its labels.
pub fn write_scene(scene: &Scene, out_dir: &Path) -> Result<ScenePaths> {
    fs::create_dir_all(out_dir).map_err(|e| DataError::io(out_dir, e))?;
    let csv_file = csv_path(out_dir, &scene.scene_id);
    let mut out = String::from("TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,Y\n");
    for frame in 0..scene.len() {
        let ts = scene.timestamp(frame);
        for traj in &scene.trajectories {
            let s = traj.states[frame];
            if s.valid {
                out.push_str(&format!("{ts},{},{},{},{}\n", traj.agent_id, object_type(traj.role), s.x, s.y));
            }
        }
    }
    fs::write(&csv_file, out).map_err(|e| DataError::io(&csv_file, e))?;

    let map = map_path(out_dir, &scene.scene_id);
    write_lane_graph(&scene.lane_graph, &map)?;
    let labels = match &scene.labels {
        Some(labels) if !labels.is_empty() => {
            let p = labels_path(out_dir, &scene.scene_id);
            write_labels(labels, &p)?;
            Some(p)
        }
        _ => None,
    };
    Ok(ScenePaths { csv: csv_file, map, labels })
}
