use maad_core::{to_displacements, Point, WINDOW_LEN};
use maad_diffcalc::{Graph, Linear, LstmCell, ParamStore, Result, Tensor, Var};
use rand::Rng;

use crate::layers::{normalized_row, Aggregation, GraphConv, LaneFusion, LaneInputs, FUSION_RADIUS};
use crate::{Architecture, Dims, Normalization, Sample};

const STEPS: usize = WINDOW_LEN - 1;

/// LSTM encoder-decoder. The decoder starts from the encoder state and is
/// fed its own previous output.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Seq2SeqCore {
    encoder: LstmCell,
    dec_embed: Linear,
    decoder: LstmCell,
    head: Linear,
}

impl Seq2SeqCore {
    fn new(store: &mut ParamStore, dims: Dims, rng: &mut impl Rng) -> Self {
        Seq2SeqCore {
            encoder: LstmCell::new(store, "encoder", dims.embed, dims.hidden, rng),
            dec_embed: Linear::new(store, "decoder.embed", 2, dims.embed, rng),
            decoder: LstmCell::new(store, "decoder", dims.embed, dims.hidden, rng),
            head: Linear::new(store, "decoder.head", dims.hidden, 2, rng),
        }
    }

    /// Returns the latent code (final encoder hidden state) and the
    /// `batch x 32` reconstruction.
    fn run(&self, g: &mut Graph, store: &ParamStore, inputs: &[Var], batch: usize) -> Result<(Var, Var)> {
        let mut state = self.encoder.zero_state(g, batch);
        for &x in inputs {
            state = self.encoder.forward(g, store, x, state)?;
        }
        let z = state.h;
        let mut prev = g.constant(Tensor::zeros(batch, 2));
        let mut outs = Vec::with_capacity(WINDOW_LEN);
        for _ in 0..WINDOW_LEN {
            let e = self.dec_embed.forward(g, store, prev)?;
            let e = g.relu(e);
            state = self.decoder.forward(g, store, e, state)?;
            prev = self.head.forward(g, store, state.h)?;
            outs.push(prev);
        }
        Ok((z, g.concat_cols(&outs)?))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Seq2SeqNet {
    embed: Linear,
    core: Seq2SeqCore,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StgaeNet {
    embed: Linear,
    conv: GraphConv,
    core: Seq2SeqCore,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LaneGcnNet {
    embed: Linear,
    actor: LstmCell,
    fusion: LaneFusion,
    interaction: GraphConv,
    head: Linear,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Net {
    Seq2Seq(Seq2SeqNet),
    Stgae(StgaeNet),
    LaneGcn(LaneGcnNet),
}

impl Net {
    pub fn new(arch: Architecture, dims: Dims, store: &mut ParamStore, rng: &mut impl Rng) -> Option<Self> {
        Some(match arch {
            Architecture::Cvm | Architecture::Lti => return None,
            Architecture::Seq2Seq => Net::Seq2Seq(Seq2SeqNet {
                embed: Linear::new(store, "embed", 2, dims.embed, rng),
                core: Seq2SeqCore::new(store, dims, rng),
            }),
            Architecture::Stgae => Net::Stgae(StgaeNet {
                embed: Linear::new(store, "embed", 2, dims.embed, rng),
                conv: GraphConv::new(store, "graph", dims.embed, rng),
                core: Seq2SeqCore::new(store, dims, rng),
            }),
            Architecture::LanegcnAe => Net::LaneGcn(LaneGcnNet {
                embed: Linear::new(store, "actor.embed", 2, dims.embed, rng),
                actor: LstmCell::new(store, "actor.lstm", dims.embed, dims.hidden, rng),
                fusion: LaneFusion::new(store, "lane", dims.hidden, rng),
                interaction: GraphConv::new(store, "interaction", dims.hidden, rng),
                head: Linear::new(store, "head", dims.hidden, 2 * STEPS, rng),
            }),
        })
    }

    /// Latent code (`batch x latent`) and reconstruction of the target's
    /// positions (`batch x 32`, interleaved x/y, in units of the position
    /// scale).
    pub fn forward(&self, g: &mut Graph, store: &ParamStore, samples: &[&Sample], norm: &Normalization) -> Result<(Var, Var)> {
        let batch = samples.len();
        match self {
            Net::Seq2Seq(net) => {
                let inputs = target_inputs(samples, norm.position_scale)
                    .into_iter()
                    .map(|t| {
                        let x = g.constant(t);
                        let e = net.embed.forward(g, store, x)?;
                        Ok(g.relu(e))
                    })
                    .collect::<Result<Vec<_>>>()?;
                net.core.run(g, store, &inputs, batch)
            }
            Net::Stgae(net) => {
                let (states, agg, self_rows) = stgae_inputs(samples, norm.position_scale);
                let x = g.constant(states);
                let h = net.embed.forward(g, store, x)?;
                let h = g.relu(h);
                let h = net.conv.forward(g, store, h, &agg, &self_rows)?;
                let inputs = (0..WINDOW_LEN).map(|t| g.slice_rows(h, t * batch, (t + 1) * batch)).collect::<Result<Vec<_>>>()?;
                net.core.run(g, store, &inputs, batch)
            }
            Net::LaneGcn(net) => net.forward(g, store, samples, norm, true),
        }
    }

    /// LaneGCN-AE forward pass with the map pathway switched off.
    pub fn forward_actor_only(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        samples: &[&Sample],
        norm: &Normalization,
    ) -> Option<Result<(Var, Var)>> {
        match self {
            Net::LaneGcn(net) => Some(net.forward(g, store, samples, norm, false)),
            _ => None,
        }
    }

    /// The final linear layer producing the reconstruction.
    pub fn output_head(&self) -> Linear {
        match self {
            Net::Seq2Seq(n) => n.core.head,
            Net::Stgae(n) => n.core.head,
            Net::LaneGcn(n) => n.head,
        }
    }
}

impl LaneGcnNet {
    fn forward(&self, g: &mut Graph, store: &ParamStore, samples: &[&Sample], norm: &Normalization, use_map: bool) -> Result<(Var, Var)> {
        let batch = samples.len();
        let offsets = actor_offsets(samples);
        let actors = *offsets.last().unwrap_or(&0);
        let mut state = self.actor.zero_state(g, actors);
        for step in actor_displacements(samples, actors, norm.displacement_scale) {
            let x = g.constant(step);
            let e = self.embed.forward(g, store, x)?;
            let e = g.relu(e);
            state = self.actor.forward(g, store, e, state)?;
        }
        let mut a = state.h;
        if use_map {
            let lanes = lane_inputs(samples, &offsets, norm.position_scale);
            a = self.fusion.forward(g, store, a, &lanes)?;
        }
        let mut agg = Aggregation::new(batch);
        let mut self_rows = Vec::with_capacity(batch);
        for (b, s) in samples.iter().enumerate() {
            let w = &s.window;
            let points: Vec<Option<Point>> = w.agents.iter().map(|ag| Some(ag.current())).collect();
            for (k, weight) in normalized_row(&points, w.target_index) {
                agg.push(offsets[b] + k, b, weight);
            }
            self_rows.push(offsets[b] + w.target_index);
        }
        let z = self.interaction.forward(g, store, a, &agg, &self_rows)?;
        let disp = self.head.forward(g, store, z)?;
        let integrate = g.constant(integration_matrix(norm.displacement_scale / norm.position_scale));
        let recon = g.matmul(disp, integrate)?;
        Ok((z, recon))
    }
}

/// Maps 15 interleaved displacements to 16 interleaved positions that end at
/// the origin, scaled by `k`.
fn integration_matrix(k: f64) -> Tensor {
    let mut m = Tensor::zeros(2 * STEPS, 2 * WINDOW_LEN);
    for t in 0..WINDOW_LEN {
        for u in t..STEPS {
            m.set(2 * u, 2 * t, -k);
            m.set(2 * u + 1, 2 * t + 1, -k);
        }
    }
    m
}

/// Target positions per step, one `batch x 2` tensor per step.
fn target_inputs(samples: &[&Sample], scale: f64) -> Vec<Tensor> {
    (0..WINDOW_LEN)
        .map(|t| {
            let data = samples
                .iter()
                .flat_map(|s| {
                    let p = s.window.target().states[t];
                    [p.x / scale, p.y / scale]
                })
                .collect();
            Tensor::new(samples.len(), 2, data)
        })
        .collect()
}

/// Target positions as `batch x 32`, in units of `scale`.
pub(crate) fn target_matrix(samples: &[&Sample], scale: f64) -> Tensor {
    let data =
        samples.iter().flat_map(|s| s.window.target().states.iter().flat_map(|p| [p.x / scale, p.y / scale]).collect::<Vec<_>>()).collect();
    Tensor::new(samples.len(), 2 * WINDOW_LEN, data)
}

/// First actor row of each sample, plus the total as the last entry.
fn actor_offsets(samples: &[&Sample]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(samples.len() + 1);
    let mut n = 0;
    for s in samples {
        offsets.push(n);
        n += s.window.agents.len();
    }
    offsets.push(n);
    offsets
}

/// Every agent state at every step, rows ordered by (step, sample, agent),
/// with the per-step target-row graph convolution inputs.
fn stgae_inputs(samples: &[&Sample], scale: f64) -> (Tensor, Aggregation, Vec<usize>) {
    let batch = samples.len();
    let offsets = actor_offsets(samples);
    let m = offsets[batch];
    let mut data = Vec::with_capacity(WINDOW_LEN * m * 2);
    let mut agg = Aggregation::new(WINDOW_LEN * batch);
    let mut self_rows = Vec::with_capacity(WINDOW_LEN * batch);
    for t in 0..WINDOW_LEN {
        for (b, s) in samples.iter().enumerate() {
            let w = &s.window;
            let points: Vec<Option<Point>> = w.agents.iter().map(|a| a.states[t].valid.then(|| a.states[t].point())).collect();
            for a in &w.agents {
                data.push(a.states[t].x / scale);
                data.push(a.states[t].y / scale);
            }
            let base = t * m + offsets[b];
            for (k, weight) in normalized_row(&points, w.target_index) {
                agg.push(base + k, t * batch + b, weight);
            }
            self_rows.push(base + w.target_index);
        }
    }
    (Tensor::new(WINDOW_LEN * m, 2, data), agg, self_rows)
}

fn actor_displacements(samples: &[&Sample], actors: usize, scale: f64) -> Vec<Tensor> {
    let disp: Vec<[Point; STEPS]> = samples.iter().flat_map(|s| s.window.agents.iter().map(|a| to_displacements(&a.states))).collect();
    (0..STEPS).map(|t| Tensor::new(actors, 2, disp.iter().flat_map(|d| [d[t][0] / scale, d[t][1] / scale]).collect())).collect()
}

fn lane_inputs(samples: &[&Sample], actor_offsets: &[usize], scale: f64) -> LaneInputs {
    let total_nodes: usize = samples.iter().map(|s| s.lanes.len()).sum();
    let mut features = Vec::with_capacity(total_nodes * 4);
    let mut connectivity = Aggregation::new(total_nodes);
    let mut offsets = Vec::new();
    let mut edge_nodes = Vec::new();
    let mut to_actor = Aggregation::new(*actor_offsets.last().unwrap_or(&0));
    let mut node_base = 0;
    for (b, s) in samples.iter().enumerate() {
        for (i, node) in s.lanes.iter().enumerate() {
            features.extend_from_slice(&[node.center[0] / scale, node.center[1] / scale, node.direction[0], node.direction[1]]);
            let w = 1.0 / node.neighbors.len().max(1) as f64;
            for &j in &node.neighbors {
                connectivity.push(node_base + j, node_base + i, w);
            }
        }
        for (a, agent) in s.window.agents.iter().enumerate() {
            let p = agent.current();
            let near: Vec<usize> = s
                .lanes
                .iter()
                .enumerate()
                .filter(|(_, n)| (n.center[0] - p[0]).hypot(n.center[1] - p[1]) <= FUSION_RADIUS)
                .map(|(i, _)| i)
                .collect();
            let w = 1.0 / near.len().max(1) as f64;
            for i in near {
                let c = s.lanes[i].center;
                offsets.extend_from_slice(&[(c[0] - p[0]) / scale, (c[1] - p[1]) / scale]);
                to_actor.push(edge_nodes.len(), actor_offsets[b] + a, w);
                edge_nodes.push(node_base + i);
            }
        }
        node_base += s.lanes.len();
    }
    LaneInputs {
        node_features: Tensor::new(total_nodes, 4, features),
        connectivity,
        offsets: Tensor::new(edge_nodes.len(), 2, offsets),
        edge_nodes,
        to_actor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integration_matrix_ends_at_origin() {
        let d = Tensor::row(&[1.0, 0.0].repeat(STEPS));
        let p = d.matmul(&integration_matrix(1.0));
        assert_eq!(p.get(0, 2 * STEPS), 0.0);
        assert_eq!(p.get(0, 0), -15.0);
        assert_eq!(p.get(0, 2 * 10), -5.0);
    }
}
