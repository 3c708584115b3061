use std::collections::HashMap;

use maad_core::{LaneGraph, Point, Scene, Window};

use crate::layers::FUSION_RADIUS;
use crate::{ModelError, Result};

/// Lane pieces whose center lies within this distance (metres) of the target
/// become graph nodes.
pub const LANE_RADIUS: f64 = 50.0;

/// Centerlines are cut into pieces of at most this arc length (metres).
pub const LANE_NODE_LENGTH: f64 = 5.0;

/// One centerline piece in the window's local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneNode {
    pub center: Point,
    /// Unit travel direction.
    pub direction: Point,
    /// Indices of connected nodes: along the lane, across successor links and
    /// to the nearest piece of each lateral neighbor.
    pub neighbors: Vec<usize>,
}

/// Model input: a window and its lane context.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub window: Window,
    pub lanes: Vec<LaneNode>,
}

impl Sample {
    pub fn new(window: Window, graph: &LaneGraph) -> Self {
        let lanes = lane_nodes(&window, graph);
        Sample { window, lanes }
    }

    pub fn without_map(window: Window) -> Self {
        Sample { window, lanes: Vec::new() }
    }

    /// Fails when no lane node lies within [`FUSION_RADIUS`] of the target.
    /// Such samples are still scored; their map term is zero.
    pub fn require_map(&self) -> Result<()> {
        let p = self.window.target().current();
        let near = self.lanes.iter().any(|n| (n.center[0] - p[0]).hypot(n.center[1] - p[1]) <= FUSION_RADIUS);
        if near {
            Ok(())
        } else {
            Err(ModelError::EmptyMap { radius: FUSION_RADIUS })
        }
    }

    /// The sample whose window scores `end_frame`.
    pub fn from_scene(scene: &Scene, end_frame: usize) -> Result<Self> {
        let window = maad_core::to_target_frame(scene, end_frame)?;
        Ok(Sample::new(window, &scene.lane_graph))
    }
}

fn length(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Cuts a polyline into pieces of equal arc length no longer than
/// [`LANE_NODE_LENGTH`]; returns (start, end) per piece.
fn pieces(line: &[Point]) -> Vec<(Point, Point)> {
    let seg_len: Vec<f64> = line.windows(2).map(|s| length(s[0], s[1])).collect();
    let total: f64 = seg_len.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    // the slack keeps lanes of an exact multiple of the piece length stable under rounding
    let k = (total / LANE_NODE_LENGTH - 1e-9).ceil().max(1.0) as usize;
    let at = |s: f64| -> Point {
        let mut rest = s;
        for (i, &l) in seg_len.iter().enumerate() {
            if rest <= l || i == seg_len.len() - 1 {
                let u = if l > 0.0 { (rest / l).clamp(0.0, 1.0) } else { 0.0 };
                let (a, b) = (line[i], line[i + 1]);
                return [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])];
            }
            rest -= l;
        }
        line[line.len() - 1]
    };
    let marks: Vec<Point> = (0..=k).map(|i| at(total * i as f64 / k as f64)).collect();
    marks.windows(2).map(|m| (m[0], m[1])).collect()
}

/// Index of the point nearest to `c`; near-ties go to the lowest index so the
/// choice survives rounding under rigid motion.
fn nearest_within_tie(points: &[Point], c: Point) -> Option<usize> {
    let best = points.iter().map(|&p| length(p, c)).fold(f64::INFINITY, f64::min);
    points.iter().position(|&p| length(p, c) <= best + 1e-6)
}

fn lane_nodes(window: &Window, graph: &LaneGraph) -> Vec<LaneNode> {
    let origin = window.pose.origin;
    let mut nodes = Vec::new();
    // (lane index, piece index) -> node index, for kept pieces only
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut piece_count = Vec::with_capacity(graph.lanes.len());
    let mut world_centers: Vec<Vec<Point>> = Vec::with_capacity(graph.lanes.len());
    for (li, lane) in graph.lanes.iter().enumerate() {
        let ps = pieces(&lane.centerline);
        piece_count.push(ps.len());
        let mut centers = Vec::with_capacity(ps.len());
        for (pi, &(a, b)) in ps.iter().enumerate() {
            let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            centers.push(c);
            if length(c, origin) > LANE_RADIUS {
                continue;
            }
            let (la, lb) = (window.pose.to_local(a), window.pose.to_local(b));
            let l = length(la, lb).max(1e-12);
            index.insert((li, pi), nodes.len());
            nodes.push(LaneNode {
                center: window.pose.to_local(c),
                direction: [(lb[0] - la[0]) / l, (lb[1] - la[1]) / l],
                neighbors: Vec::new(),
            });
        }
        world_centers.push(centers);
    }

    let mut edges = Vec::new();
    for (li, lane) in graph.lanes.iter().enumerate() {
        let n = piece_count[li];
        for pi in 1..n {
            edges.push(((li, pi - 1), (li, pi)));
        }
        if n == 0 {
            continue;
        }
        for succ in &lane.successors {
            if let Some(si) = graph.index_of(*succ) {
                if piece_count[si] > 0 {
                    edges.push(((li, n - 1), (si, 0)));
                }
            }
        }
        for side in [lane.left_neighbor, lane.right_neighbor].into_iter().flatten() {
            let Some(si) = graph.index_of(side) else { continue };
            for pi in 0..n {
                let c = world_centers[li][pi];
                let nearest = nearest_within_tie(&world_centers[si], c);
                if let Some(k) = nearest {
                    edges.push(((li, pi), (si, k)));
                }
            }
        }
    }
    for (a, b) in edges {
        if let (Some(&i), Some(&j)) = (index.get(&a), index.get(&b)) {
            if i != j {
                nodes[i].neighbors.push(j);
                nodes[j].neighbors.push(i);
            }
        }
    }
    for node in &mut nodes {
        node.neighbors.sort_unstable();
        node.neighbors.dedup();
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use maad_core::{Lane, Pose};

    fn lane(id: u64, line: Vec<Point>, successors: Vec<u64>, predecessors: Vec<u64>) -> Lane {
        Lane { id, centerline: line, successors, predecessors, left_neighbor: None, right_neighbor: None }
    }

    #[test]
    fn pieces_respect_maximum_length() {
        let ps = pieces(&[[0.0, 0.0], [12.0, 0.0]]);
        assert_eq!(ps.len(), 3);
        for (a, b) in ps {
            assert!((length(a, b) - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chained_lanes_are_connected_across_the_link() {
        let graph = LaneGraph::new(vec![
            lane(1, vec![[-10.0, 0.0], [0.0, 0.0]], vec![2], vec![]),
            lane(2, vec![[0.0, 0.0], [10.0, 0.0]], vec![], vec![1]),
        ])
        .unwrap();
        let mut window = Window::from_target_positions([[0.0, 0.0]; 16]);
        window.pose = Pose::identity();
        let nodes = lane_nodes(&window, &graph);
        assert_eq!(nodes.len(), 4);
        assert_eq!(nodes[1].neighbors, vec![0, 2]);
        assert_eq!(nodes[0].direction, [1.0, 0.0]);
    }

    #[test]
    fn rounding_does_not_add_a_piece() {
        assert_eq!(pieces(&[[0.0, 0.0], [20.000000000000046, 0.0]]).len(), 4);
        assert_eq!(pieces(&[[0.0, 0.0], [19.999999999999908, 0.0]]).len(), 4);
    }

    #[test]
    fn far_lanes_are_dropped() {
        let graph = LaneGraph::new(vec![lane(1, vec![[500.0, 0.0], [510.0, 0.0]], vec![], vec![])]).unwrap();
        let window = Window::from_target_positions([[0.0, 0.0]; 16]);
        assert!(lane_nodes(&window, &graph).is_empty());
    }
}
