//! Graph layers shared by the interaction-aware auto-encoders.

use maad_core::Point;
use maad_diffcalc::{Graph, Linear, ParamStore, Result, Tensor, Var};
use rand::Rng;

/// Regularizer of the inverse-distance adjacency, in metres.
pub const ADJACENCY_EPS: f64 = 0.1;

/// Lane nodes within this distance (metres) of an actor feed its feature.
pub const FUSION_RADIUS: f64 = 30.0;

/// Row `target` of the symmetrically normalized adjacency
/// `D^-1/2 (A + I) D^-1/2`, with `A_jk = 1 / (d_jk + ADJACENCY_EPS)` between
/// present agents. Absent agents (`None`) have no edges. Returns
/// `(agent, weight)` pairs in agent order, the self loop included.
pub fn normalized_row(points: &[Option<Point>], target: usize) -> Vec<(usize, f64)> {
    let Some(tp) = points[target] else { return vec![(target, 1.0)] };
    let weight = |a: Point, b: Point| 1.0 / ((a[0] - b[0]).hypot(a[1] - b[1]) + ADJACENCY_EPS);
    let degree = |j: usize, pj: Point| -> f64 {
        1.0 + points.iter().enumerate().filter(|&(k, _)| k != j).filter_map(|(_, p)| p.map(|p| weight(pj, p))).sum::<f64>()
    };
    let d_target = degree(target, tp);
    points
        .iter()
        .enumerate()
        .filter_map(|(k, p)| {
            let p = (*p)?;
            let a = if k == target { 1.0 } else { weight(tp, p) };
            Some((k, a / (d_target * degree(k, p)).sqrt()))
        })
        .collect()
}

/// Weighted sum of source rows into destination rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregation {
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    pub weight: Vec<f64>,
    pub out_rows: usize,
}

impl Aggregation {
    pub fn new(out_rows: usize) -> Self {
        Aggregation { out_rows, ..Aggregation::default() }
    }

    pub fn push(&mut self, src: usize, dst: usize, weight: f64) {
        self.src.push(src);
        self.dst.push(dst);
        self.weight.push(weight);
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn apply(&self, g: &mut Graph, x: Var) -> Result<Var> {
        let picked = g.gather_rows(x, &self.src)?;
        let weighted = g.scale_rows(picked, &self.weight)?;
        g.scatter_add_rows(weighted, &self.dst, self.out_rows)
    }
}

/// Distance-weighted graph convolution with a linear residual path,
/// `relu(N H W) + H W_res`, evaluated only at the rows named by `self_rows`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConv {
    pub weight: Linear,
    pub residual: Linear,
}

impl GraphConv {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, rng: &mut impl Rng) -> Self {
        GraphConv {
            weight: Linear::without_bias(store, &format!("{name}.weight"), dim, dim, rng),
            residual: Linear::without_bias(store, &format!("{name}.residual"), dim, dim, rng),
        }
    }

    /// `agg` holds the normalized adjacency rows; output row `r` pairs with
    /// input row `self_rows[r]` on the residual path.
    pub fn forward(&self, g: &mut Graph, store: &ParamStore, h: Var, agg: &Aggregation, self_rows: &[usize]) -> Result<Var> {
        let hw = self.weight.forward(g, store, h)?;
        let pooled = agg.apply(g, hw)?;
        let act = g.relu(pooled);
        let res = self.residual.forward(g, store, h)?;
        let res = g.gather_rows(res, self_rows)?;
        g.add(act, res)
    }
}

/// Constant inputs of [`LaneFusion`] for a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneInputs {
    /// One row per lane node: `[center / scale, direction]`.
    pub node_features: Tensor,
    /// Mean over connected nodes.
    pub connectivity: Aggregation,
    /// Per actor-node edge: `(center - actor) / scale`.
    pub offsets: Tensor,
    /// Lane node of each edge.
    pub edge_nodes: Vec<usize>,
    /// Mean over an actor's edges, into actor rows.
    pub to_actor: Aggregation,
}

impl LaneInputs {
    pub fn is_empty(&self) -> bool {
        self.edge_nodes.is_empty()
    }
}

/// Simplified actor-map fusion: a lane-node encoder, one convolution over
/// lane connectivity, then a relative-position-conditioned mean of nearby
/// lane nodes added to each actor feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneFusion {
    pub node_embed: Linear,
    pub conv_self: Linear,
    pub conv_nbr: Linear,
    pub edge: Linear,
    pub out: Linear,
}

pub const LANE_FEATURES: usize = 4;

impl LaneFusion {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, rng: &mut impl Rng) -> Self {
        LaneFusion {
            node_embed: Linear::new(store, &format!("{name}.node_embed"), LANE_FEATURES, dim, rng),
            conv_self: Linear::new(store, &format!("{name}.conv_self"), dim, dim, rng),
            conv_nbr: Linear::without_bias(store, &format!("{name}.conv_nbr"), dim, dim, rng),
            edge: Linear::new(store, &format!("{name}.edge"), 2 + dim, dim, rng),
            out: Linear::without_bias(store, &format!("{name}.out"), dim, dim, rng),
        }
    }

    /// Lane context added to `actors` (one row per actor). Without any
    /// actor-lane edge the actor features pass through untouched.
    pub fn forward(&self, g: &mut Graph, store: &ParamStore, actors: Var, lanes: &LaneInputs) -> Result<Var> {
        if lanes.is_empty() {
            return Ok(actors);
        }
        let x = g.constant(lanes.node_features.clone());
        let n = self.node_embed.forward(g, store, x)?;
        let n = g.relu(n);
        let nbr = lanes.connectivity.apply(g, n)?;
        let own = self.conv_self.forward(g, store, n)?;
        let nbr = self.conv_nbr.forward(g, store, nbr)?;
        let n = g.add(own, nbr)?;
        let n = g.relu(n);
        let picked = g.gather_rows(n, &lanes.edge_nodes)?;
        let offsets = g.constant(lanes.offsets.clone());
        let e = g.concat_cols(&[offsets, picked])?;
        let e = self.edge.forward(g, store, e)?;
        let e = g.relu(e);
        let pooled = lanes.to_actor.apply(g, e)?;
        let ctx = self.out.forward(g, store, pooled)?;
        g.add(actors, ctx)
    }
}
