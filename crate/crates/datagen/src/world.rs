use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use maad_core::{Lane, LaneGraph, LaneId, Point};
use serde::{Deserialize, Serialize};

use crate::geometry::Path;
use crate::DatagenError;

pub const LANE_WIDTH: f64 = 3.5;
/// Half side of the square junction box.
pub const BOX_HALF: f64 = 8.0;
pub const ARM_LENGTH: f64 = 120.0;
pub const ROAD_LENGTH: f64 = 320.0;
const PIECE_LENGTH: f64 = 20.0;
const CURVE_RADIUS: f64 = 220.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldTemplate {
    Straight,
    Curved,
    TIntersection,
    FourWay,
}

impl WorldTemplate {
    pub const ALL: [WorldTemplate; 4] =
        [WorldTemplate::Straight, WorldTemplate::Curved, WorldTemplate::TIntersection, WorldTemplate::FourWay];

    pub fn name(self) -> &'static str {
        match self {
            WorldTemplate::Straight => "straight",
            WorldTemplate::Curved => "curved",
            WorldTemplate::TIntersection => "t_intersection",
            WorldTemplate::FourWay => "four_way",
        }
    }

    pub fn is_intersection(self) -> bool {
        matches!(self, WorldTemplate::TIntersection | WorldTemplate::FourWay)
    }
}

impl fmt::Display for WorldTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorldTemplate {
    type Err = DatagenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WorldTemplate::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| DatagenError::Config(format!("unknown world template `{s}`")))
    }
}

/// Which same-direction lane the target starts in on multi-lane roads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartLane {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldSpec {
    pub template: WorldTemplate,
    pub start_lane: StartLane,
}

impl WorldSpec {
    pub fn new(template: WorldTemplate, start_lane: StartLane) -> Self {
        WorldSpec { template, start_lane }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Left,
    Right,
    Through,
}

/// Target routes through a junction, all starting at the far end of the approach arm.
#[derive(Debug, Clone)]
pub struct Junction {
    pub left: Option<Path>,
    pub right: Option<Path>,
    pub through: Option<Path>,
    /// Arc length at which the approach lane meets the box.
    pub entry_s: f64,
}

impl Junction {
    pub fn route(&self, turn: Turn) -> Option<&Path> {
        match turn {
            Turn::Left => self.left.as_ref(),
            Turn::Right => self.right.as_ref(),
            Turn::Through => self.through.as_ref(),
        }
    }
}

/// A directed lane used both for the lane graph and for background traffic.
#[derive(Debug, Clone)]
pub struct LanePath {
    pub path: Path,
    pub kind: LaneKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneKind {
    /// Same direction as the target on a road template.
    Forward,
    Oncoming,
    /// Junction arm lane heading into the box.
    Inbound,
    /// Junction arm lane leaving the box.
    Outbound,
    Connector,
}

/// Static geometry of one template in canonical coordinates.
#[derive(Debug, Clone)]
pub struct World {
    pub spec: WorldSpec,
    pub lanes: Vec<LanePath>,
    pub lane_graph: LaneGraph,
    /// Lane path the target starts on (index into `lanes`).
    pub target_lane: usize,
    /// Same-direction lane next to the target on roads.
    pub adjacent_lane: Option<usize>,
    pub junction: Option<Junction>,
}

struct LaneDef {
    path: Path,
    kind: LaneKind,
    successors: Vec<usize>,
    left: Option<usize>,
    right: Option<usize>,
}

fn piece_count(len: f64) -> usize {
    (len / PIECE_LENGTH).ceil().max(1.0) as usize
}

fn piece_id(def: usize, k: usize) -> LaneId {
    (def as LaneId + 1) * 1000 + k as LaneId
}

fn build_graph(defs: &[LaneDef]) -> LaneGraph {
    // Neighbouring lanes share a piece count so their pieces line up.
    let counts: Vec<usize> = defs
        .iter()
        .map(|d| {
            let mut n = piece_count(d.path.length());
            for j in [d.left, d.right].into_iter().flatten() {
                n = n.max(piece_count(defs[j].path.length()));
            }
            n
        })
        .collect();
    let mut lanes = Vec::new();
    let mut preds: Vec<Vec<LaneId>> = vec![Vec::new(); defs.len()];
    for (i, d) in defs.iter().enumerate() {
        for &j in &d.successors {
            preds[j].push(piece_id(i, counts[i] - 1));
        }
    }
    for (i, d) in defs.iter().enumerate() {
        let n = counts[i];
        let len = d.path.length();
        for k in 0..n {
            let (a, b) = (len * k as f64 / n as f64, len * (k + 1) as f64 / n as f64);
            let successors = if k + 1 < n { vec![piece_id(i, k + 1)] } else { d.successors.iter().map(|&j| piece_id(j, 0)).collect() };
            let predecessors = if k > 0 { vec![piece_id(i, k - 1)] } else { preds[i].clone() };
            let neighbor = |j: Option<usize>| j.filter(|&j| counts[j] == n).map(|j| piece_id(j, k));
            lanes.push(Lane {
                id: piece_id(i, k),
                centerline: d.path.sample(a, b, 2.0),
                successors,
                predecessors,
                left_neighbor: neighbor(d.left),
                right_neighbor: neighbor(d.right),
            });
        }
    }
    LaneGraph::new(lanes).expect("template lane graphs are valid")
}

fn road_lanes(curved: bool) -> Vec<Path> {
    let offsets = [0.5 * LANE_WIDTH, 1.5 * LANE_WIDTH];
    let mut out = Vec::new();
    if curved {
        // Forward lanes turn left around (0, R); the right side of travel is the outside.
        let sweep = ROAD_LENGTH / CURVE_RADIUS;
        let phi0 = -FRAC_PI_2 - sweep / 4.0;
        let at = |r: f64, phi: f64| -> Point { [r * phi.cos(), CURVE_RADIUS + r * phi.sin()] };
        for off in offsets {
            let r = CURVE_RADIUS + off;
            out.push(Path::builder(at(r, phi0), phi0 + FRAC_PI_2).arc(r, sweep).build());
        }
        for off in offsets {
            let r = CURVE_RADIUS - off;
            let phi1 = phi0 + sweep;
            out.push(Path::builder(at(r, phi1), phi1 - FRAC_PI_2).arc(r, -sweep).build());
        }
    } else {
        let x0 = -ROAD_LENGTH / 4.0;
        for off in offsets {
            out.push(Path::line([x0, -off], 0.0, ROAD_LENGTH));
        }
        for off in offsets {
            out.push(Path::line([x0 + ROAD_LENGTH, off], PI, ROAD_LENGTH));
        }
    }
    out
}

fn road_world(spec: WorldSpec) -> World {
    let paths = road_lanes(spec.template == WorldTemplate::Curved);
    let kinds = [LaneKind::Forward, LaneKind::Forward, LaneKind::Oncoming, LaneKind::Oncoming];
    // Index 0/2 are the inner lanes; the inner lane is left of the outer one.
    let neighbours = [(None, Some(1)), (Some(0), None), (None, Some(3)), (Some(2), None)];
    let defs: Vec<LaneDef> = paths
        .into_iter()
        .zip(kinds)
        .zip(neighbours)
        .map(|((path, kind), (left, right))| LaneDef { path, kind, successors: Vec::new(), left, right })
        .collect();
    let graph = build_graph(&defs);
    let (target_lane, adjacent) = match spec.start_lane {
        StartLane::Inner => (0, 1),
        StartLane::Outer => (1, 0),
    };
    World {
        spec,
        lane_graph: graph,
        lanes: defs.into_iter().map(|d| LanePath { path: d.path, kind: d.kind }).collect(),
        target_lane,
        adjacent_lane: Some(adjacent),
        junction: None,
    }
}

/// Arm `a` points from the box centre towards angle `a * pi/2 + pi`; arm 0 is the west approach.
fn arm_angle(arm: usize) -> f64 {
    PI + arm as f64 * FRAC_PI_2
}

fn right_of(heading: f64) -> Point {
    [heading.sin(), -heading.cos()]
}

fn inbound_lane(arm: usize) -> Path {
    let alpha = arm_angle(arm);
    let h = alpha + PI;
    let r = right_of(h);
    let start =
        [(BOX_HALF + ARM_LENGTH) * alpha.cos() + 0.5 * LANE_WIDTH * r[0], (BOX_HALF + ARM_LENGTH) * alpha.sin() + 0.5 * LANE_WIDTH * r[1]];
    Path::line(start, h, ARM_LENGTH)
}

fn outbound_lane(arm: usize) -> Path {
    let alpha = arm_angle(arm);
    let r = right_of(alpha);
    let start = [BOX_HALF * alpha.cos() + 0.5 * LANE_WIDTH * r[0], BOX_HALF * alpha.sin() + 0.5 * LANE_WIDTH * r[1]];
    Path::line(start, alpha, ARM_LENGTH)
}

fn turn_between(from: usize, to: usize) -> Option<Turn> {
    match (to + 4 - from) % 4 {
        1 => Some(Turn::Right),
        2 => Some(Turn::Through),
        3 => Some(Turn::Left),
        _ => None,
    }
}

fn connector(from: usize, turn: Turn) -> Path {
    let inbound = inbound_lane(from);
    let start = inbound.point(ARM_LENGTH);
    let h = inbound.heading(ARM_LENGTH);
    let b = Path::builder(start, h);
    match turn {
        Turn::Through => b.straight(2.0 * BOX_HALF),
        Turn::Left => b.arc(BOX_HALF + 0.5 * LANE_WIDTH, FRAC_PI_2),
        Turn::Right => b.arc(BOX_HALF - 0.5 * LANE_WIDTH, -FRAC_PI_2),
    }
    .build()
}

/// Approach, junction movement and exit as one path from the west arm.
pub fn junction_route(turn: Turn) -> Path {
    let b = Path::builder(inbound_lane(0).point(0.0), 0.0).straight(ARM_LENGTH);
    match turn {
        Turn::Through => b.straight(2.0 * BOX_HALF),
        Turn::Left => b.arc(BOX_HALF + 0.5 * LANE_WIDTH, FRAC_PI_2),
        Turn::Right => b.arc(BOX_HALF - 0.5 * LANE_WIDTH, -FRAC_PI_2),
    }
    .straight(ARM_LENGTH)
    .build()
}

fn junction_world(spec: WorldSpec) -> World {
    let arms: &[usize] = match spec.template {
        WorldTemplate::FourWay => &[0, 1, 2, 3],
        _ => &[0, 1, 3],
    };
    let mut defs = Vec::new();
    let mut inbound = Vec::new();
    let mut outbound = Vec::new();
    for &a in arms {
        inbound.push(defs.len());
        defs.push(LaneDef { path: inbound_lane(a), kind: LaneKind::Inbound, successors: vec![], left: None, right: None });
        outbound.push(defs.len());
        defs.push(LaneDef { path: outbound_lane(a), kind: LaneKind::Outbound, successors: vec![], left: None, right: None });
    }
    for (i, &a) in arms.iter().enumerate() {
        for (j, &b) in arms.iter().enumerate() {
            if let Some(turn) = turn_between(a, b) {
                let c = defs.len();
                defs.push(LaneDef {
                    path: connector(a, turn),
                    kind: LaneKind::Connector,
                    successors: vec![outbound[j]],
                    left: None,
                    right: None,
                });
                defs[inbound[i]].successors.push(c);
            }
        }
    }
    let graph = build_graph(&defs);
    let has = |t: Turn| arms.iter().any(|&b| turn_between(0, b) == Some(t));
    let junction = Junction {
        left: has(Turn::Left).then(|| junction_route(Turn::Left)),
        right: has(Turn::Right).then(|| junction_route(Turn::Right)),
        through: has(Turn::Through).then(|| junction_route(Turn::Through)),
        entry_s: ARM_LENGTH,
    };
    World {
        spec,
        lane_graph: graph,
        lanes: defs.into_iter().map(|d| LanePath { path: d.path, kind: d.kind }).collect(),
        target_lane: inbound[0],
        adjacent_lane: None,
        junction: Some(junction),
    }
}

impl World {
    pub fn build(spec: WorldSpec) -> World {
        if spec.template.is_intersection() {
            junction_world(spec)
        } else {
            road_world(spec)
        }
    }

    /// Junction arm lane indices of the given kind, excluding the target's approach.
    pub fn lanes_of(&self, kind: LaneKind) -> Vec<usize> {
        (0..self.lanes.len()).filter(|&i| self.lanes[i].kind == kind && i != self.target_lane).collect()
    }
}
