use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Point, Result, Subclass, FRAME_DT};

/// Position of one agent at one frame. Padded states sit at exactly (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl AgentState {
    pub const PADDED: AgentState = AgentState { x: 0.0, y: 0.0, valid: false };

    pub fn new(x: f64, y: f64) -> Self {
        AgentState { x, y, valid: true }
    }

    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentRole {
    Target,
    Other,
    Ego,
}

/// One agent's states over the full frame range of its scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agent_id: String,
    pub role: AgentRole,
    pub states: Vec<AgentState>,
}

impl Trajectory {
    pub fn new(agent_id: impl Into<String>, role: AgentRole, states: Vec<AgentState>) -> Self {
        Trajectory { agent_id: agent_id.into(), role, states }
    }

    pub fn first_valid(&self) -> Option<usize> {
        self.states.iter().position(|s| s.valid)
    }
}

pub type LaneId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub id: LaneId,
    pub centerline: Vec<Point>,
    #[serde(default)]
    pub successors: Vec<LaneId>,
    #[serde(default)]
    pub predecessors: Vec<LaneId>,
    #[serde(default)]
    pub left_neighbor: Option<LaneId>,
    #[serde(default)]
    pub right_neighbor: Option<LaneId>,
}

/// Directed lane-centreline graph: the static context of a scene.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LaneGraph {
    pub lanes: Vec<Lane>,
}

/// Closest point on a lane centreline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneProjection {
    pub lane_index: usize,
    pub distance: f64,
    /// Unit direction of travel of the lane at the projected point.
    pub direction: Point,
    /// Signed lateral offset, positive to the left of the direction of travel.
    pub lateral: f64,
}

impl LaneGraph {
    pub fn new(lanes: Vec<Lane>) -> Result<Self> {
        let graph = LaneGraph { lanes };
        graph.validate()?;
        Ok(graph)
    }

    pub fn empty() -> Self {
        LaneGraph::default()
    }

    pub fn is_empty(&self) -> bool {
        self.lanes.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::with_capacity(self.lanes.len());
        for lane in &self.lanes {
            if !ids.insert(lane.id) {
                return Err(CoreError::InvalidLaneGraph(format!("duplicate lane id {}", lane.id)));
            }
        }
        for lane in &self.lanes {
            if lane.centerline.len() < 2 {
                return Err(CoreError::InvalidLaneGraph(format!("lane {} has {} centerline points", lane.id, lane.centerline.len())));
            }
            if lane.centerline.iter().flatten().any(|v| !v.is_finite()) {
                return Err(CoreError::InvalidLaneGraph(format!("lane {} has non-finite coordinates", lane.id)));
            }
            let refs = lane.successors.iter().chain(&lane.predecessors).chain(lane.left_neighbor.iter()).chain(lane.right_neighbor.iter());
            for r in refs {
                if !ids.contains(r) {
                    return Err(CoreError::InvalidLaneGraph(format!("lane {} references unknown lane {r}", lane.id)));
                }
            }
        }
        Ok(())
    }

    pub fn lane(&self, id: LaneId) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    pub fn index_of(&self, id: LaneId) -> Option<usize> {
        self.lanes.iter().position(|l| l.id == id)
    }

    /// Projects `p` onto the nearest centreline segment of the graph.
    pub fn nearest_lane(&self, p: Point) -> Option<LaneProjection> {
        let mut best: Option<LaneProjection> = None;
        for (lane_index, lane) in self.lanes.iter().enumerate() {
            for seg in lane.centerline.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                let d = [b[0] - a[0], b[1] - a[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                if len2 <= 0.0 {
                    continue;
                }
                let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
                let q = [a[0] + t * d[0], a[1] + t * d[1]];
                let distance = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                if best.is_none_or(|b| distance < b.distance) {
                    let len = len2.sqrt();
                    let direction = [d[0] / len, d[1] / len];
                    let lateral = direction[0] * (p[1] - q[1]) - direction[1] * (p[0] - q[0]);
                    best = Some(LaneProjection { lane_index, distance, direction, lateral });
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelCategory {
    Normal,
    Abnormal,
    Ignore,
}

impl LabelCategory {
    pub fn name(self) -> &'static str {
        match self {
            LabelCategory::Normal => "normal",
            LabelCategory::Abnormal => "abnormal",
            LabelCategory::Ignore => "ignore",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLabel {
    pub frame_index: usize,
    pub category: LabelCategory,
    pub subclass: Option<Subclass>,
}

impl FrameLabel {
    /// Builds a label, checking that the subclass agrees with the category.
    pub fn new(frame_index: usize, category: LabelCategory, subclass: Option<Subclass>) -> Result<Self> {
        match (category, subclass) {
            (LabelCategory::Ignore, None) => {}
            (LabelCategory::Ignore, Some(s)) => {
                return Err(CoreError::InvalidLabel(format!("frame {frame_index}: ignore label carries subclass {s}")))
            }
            (_, None) => return Err(CoreError::InvalidLabel(format!("frame {frame_index}: {} label without subclass", category.name()))),
            (c, Some(s)) if s.is_abnormal() != (c == LabelCategory::Abnormal) => {
                return Err(CoreError::InvalidLabel(format!("frame {frame_index}: subclass {s} contradicts category {}", c.name())))
            }
            _ => {}
        }
        Ok(FrameLabel { frame_index, category, subclass })
    }
}

/// A timestamped multi-agent scene. All trajectories span the same frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scene_id: String,
    /// Timestamp of frame 0, in seconds.
    pub start_time: f64,
    pub trajectories: Vec<Trajectory>,
    pub lane_graph: LaneGraph,
    pub labels: Option<Vec<FrameLabel>>,
}

impl Scene {
    pub fn new(
        scene_id: impl Into<String>,
        start_time: f64,
        trajectories: Vec<Trajectory>,
        lane_graph: LaneGraph,
        labels: Option<Vec<FrameLabel>>,
    ) -> Result<Self> {
        let scene = Scene { scene_id: scene_id.into(), start_time, trajectories, lane_graph, labels };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.len();
        let mut targets = 0;
        let mut ids = HashSet::new();
        for traj in &self.trajectories {
            if traj.states.len() != len {
                return Err(CoreError::InvalidScene(format!(
                    "trajectory {} has {} frames, scene has {len}",
                    traj.agent_id,
                    traj.states.len()
                )));
            }
            if !ids.insert(traj.agent_id.as_str()) {
                return Err(CoreError::InvalidScene(format!("duplicate agent id {}", traj.agent_id)));
            }
            if traj.role == AgentRole::Target {
                targets += 1;
            }
            for (frame, s) in traj.states.iter().enumerate() {
                let ok = if s.valid { s.x.is_finite() && s.y.is_finite() } else { s.x == 0.0 && s.y == 0.0 };
                if !ok {
                    return Err(CoreError::InvalidScene(format!(
                        "agent {} frame {frame}: bad state ({}, {}, valid={})",
                        traj.agent_id, s.x, s.y, s.valid
                    )));
                }
            }
        }
        if targets > 1 {
            return Err(CoreError::InvalidScene(format!("{targets} TARGET trajectories")));
        }
        if let Some(labels) = &self.labels {
            let mut prev: Option<usize> = None;
            for l in labels {
                if l.frame_index >= len {
                    return Err(CoreError::InvalidLabel(format!("frame {} outside scene of {len} frames", l.frame_index)));
                }
                if prev.is_some_and(|p| p >= l.frame_index) {
                    return Err(CoreError::InvalidLabel(format!("frame {} labelled out of order", l.frame_index)));
                }
                prev = Some(l.frame_index);
                FrameLabel::new(l.frame_index, l.category, l.subclass)?;
            }
        }
        self.lane_graph.validate()
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.trajectories.first().map_or(0, |t| t.states.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn timestamp(&self, frame: usize) -> f64 {
        self.start_time + frame as f64 * FRAME_DT
    }

    pub fn target_index(&self) -> Option<usize> {
        self.trajectories.iter().position(|t| t.role == AgentRole::Target)
    }

    pub fn target(&self) -> Option<&Trajectory> {
        self.target_index().map(|i| &self.trajectories[i])
    }

    pub fn label_at(&self, frame: usize) -> Option<&FrameLabel> {
        let labels = self.labels.as_ref()?;
        labels.binary_search_by_key(&frame, |l| l.frame_index).ok().map(|i| &labels[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane(id: LaneId, pts: Vec<Point>) -> Lane {
        Lane { id, centerline: pts, successors: vec![], predecessors: vec![], left_neighbor: None, right_neighbor: None }
    }

    #[test]
    fn lane_graph_rejects_dangling_reference() {
        let mut a = lane(1, vec![[0.0, 0.0], [1.0, 0.0]]);
        a.successors.push(7);
        assert!(matches!(LaneGraph::new(vec![a]), Err(CoreError::InvalidLaneGraph(_))));
    }

    #[test]
    fn lane_graph_rejects_short_or_nan_centerlines() {
        assert!(LaneGraph::new(vec![lane(1, vec![[0.0, 0.0]])]).is_err());
        assert!(LaneGraph::new(vec![lane(1, vec![[0.0, 0.0], [f64::NAN, 1.0]])]).is_err());
    }

    #[test]
    fn nearest_lane_reports_direction_and_side() {
        let g = LaneGraph::new(vec![lane(1, vec![[0.0, 0.0], [10.0, 0.0]]), lane(2, vec![[10.0, 4.0], [0.0, 4.0]])]).unwrap();
        let p = g.nearest_lane([5.0, 1.0]).unwrap();
        assert_eq!(p.lane_index, 0);
        assert!((p.distance - 1.0).abs() < 1e-12);
        assert_eq!(p.direction, [1.0, 0.0]);
        assert!(p.lateral > 0.0);
        let q = g.nearest_lane([5.0, 3.5]).unwrap();
        assert_eq!(q.lane_index, 1);
        assert_eq!(q.direction, [-1.0, 0.0]);
    }

    #[test]
    fn label_subclass_must_match_category() {
        assert!(FrameLabel::new(0, LabelCategory::Ignore, None).is_ok());
        assert!(FrameLabel::new(0, LabelCategory::Ignore, Some(Subclass::Straight)).is_err());
        assert!(FrameLabel::new(0, LabelCategory::Normal, None).is_err());
        assert!(FrameLabel::new(0, LabelCategory::Normal, Some(Subclass::GhostDriver)).is_err());
        assert!(FrameLabel::new(0, LabelCategory::Abnormal, Some(Subclass::GhostDriver)).is_ok());
    }

    #[test]
    fn scene_rejects_two_targets_and_ragged_trajectories() {
        let t = |id: &str, role, n| Trajectory::new(id, role, vec![AgentState::new(0.0, 0.0); n]);
        let two = Scene::new("s", 0.0, vec![t("a", AgentRole::Target, 3), t("b", AgentRole::Target, 3)], LaneGraph::empty(), None);
        assert!(two.is_err());
        let ragged = Scene::new("s", 0.0, vec![t("a", AgentRole::Target, 3), t("b", AgentRole::Other, 4)], LaneGraph::empty(), None);
        assert!(ragged.is_err());
    }

    #[test]
    fn padded_state_must_be_origin() {
        let bad = Trajectory::new("a", AgentRole::Target, vec![AgentState { x: 1.0, y: 0.0, valid: false }]);
        assert!(Scene::new("s", 0.0, vec![bad], LaneGraph::empty(), None).is_err());
    }
}
