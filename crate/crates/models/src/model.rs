use std::path::Path;

use maad_core::{Point, WINDOW_LEN};
use maad_dataio::{load_checkpoint, Checkpoint, CheckpointHeader};
use maad_diffcalc::{Graph, Linear, ParamStore, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dsvdd::dsvdd_score;
use crate::nets::{target_matrix, Net};
use crate::{
    cvm_reconstruct, lti_reconstruct, mean_distance, Architecture, Dims, ModelDescriptor, ModelError, Normalization, Objective, Result,
    Sample,
};

/// Windows per forward pass when scoring.
const SCORE_CHUNK: usize = 64;

/// Graph nodes of one forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Output {
    /// `batch x latent`.
    pub z: Var,
    /// `batch x 32` reconstructed target positions in position-scale units.
    pub recon: Var,
    /// `batch x 32` observed target positions in the same units.
    pub target: Var,
}

/// A trainable auto-encoder with its parameters and input scales.
#[derive(Debug, Clone)]
pub struct DeepModel {
    pub descriptor: ModelDescriptor,
    pub norm: Normalization,
    pub store: ParamStore,
    net: Net,
}

/// Per-window result of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub z: Vec<f64>,
    /// Reconstructed target positions in metres (local frame).
    pub recon: [Point; WINDOW_LEN],
    pub score: f64,
}

impl DeepModel {
    pub fn new(descriptor: ModelDescriptor, norm: Normalization, seed: u64) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Net::new(descriptor.architecture, descriptor.dims, &mut store, &mut rng)
            .ok_or(ModelError::NotTrainable(descriptor.architecture.name()))?;
        Ok(DeepModel { descriptor, norm, store, net })
    }

    pub fn architecture(&self) -> Architecture {
        self.descriptor.architecture
    }

    pub fn output_head(&self) -> Linear {
        self.net.output_head()
    }

    pub fn center(&self) -> Result<&[f64]> {
        self.descriptor.dsvdd_center.as_deref().ok_or(ModelError::CenterUninitialized)
    }

    pub fn forward(&self, g: &mut Graph, samples: &[&Sample]) -> Result<Output> {
        self.forward_with(g, &self.store, samples)
    }

    /// Forward pass reading parameters from `store` instead of the model's
    /// own; `store` must share the model's layout.
    pub fn forward_with(&self, g: &mut Graph, store: &ParamStore, samples: &[&Sample]) -> Result<Output> {
        let (z, recon) = self.net.forward(g, store, samples, &self.norm)?;
        let target = g.constant(target_matrix(samples, self.norm.position_scale));
        Ok(Output { z, recon, target })
    }

    /// LaneGCN-AE without its map pathway; `None` for other architectures.
    pub fn forward_actor_only(&self, g: &mut Graph, samples: &[&Sample]) -> Result<Option<Output>> {
        let Some(res) = self.net.forward_actor_only(g, &self.store, samples, &self.norm) else { return Ok(None) };
        let (z, recon) = res?;
        let target = g.constant(target_matrix(samples, self.norm.position_scale));
        Ok(Some(Output { z, recon, target }))
    }

    /// Batch-mean reconstruction loss: squared per-step distance averaged
    /// over the 16 steps, in position-scale units.
    pub fn recon_loss(&self, g: &mut Graph, out: &Output) -> Result<Var> {
        let se = g.squared_euclidean(out.recon, out.target)?;
        let per_window = g.scale(se, 1.0 / WINDOW_LEN as f64);
        Ok(g.mean(per_window))
    }

    /// Batch-mean squared distance of the latent codes from the center.
    pub fn dsvdd_loss(&self, g: &mut Graph, out: &Output) -> Result<Var> {
        let c = self.center()?;
        let batch = g.value(out.z).rows();
        let centers = g.constant(Tensor::new(batch, c.len(), c.repeat(batch)));
        let se = g.squared_euclidean(out.z, centers)?;
        Ok(g.mean(se))
    }

    /// Forward pass without gradients, in chunks.
    pub fn evaluate(&self, samples: &[Sample]) -> Result<Vec<Evaluation>> {
        let center = match self.descriptor.objective {
            Objective::Dsvdd => Some(self.center()?),
            Objective::Recon => None,
        };
        let sigma = self.norm.position_scale;
        let mut out = Vec::with_capacity(samples.len());
        for chunk in samples.chunks(SCORE_CHUNK) {
            let refs: Vec<&Sample> = chunk.iter().collect();
            let mut g = Graph::new();
            let (z, recon) = self.net.forward(&mut g, &self.store, &refs, &self.norm)?;
            let (z, recon) = (g.value(z), g.value(recon));
            for (b, s) in chunk.iter().enumerate() {
                let zb = z.row_slice(b).to_vec();
                let r = recon.row_slice(b);
                let recon: [Point; WINDOW_LEN] = std::array::from_fn(|t| [r[2 * t] * sigma, r[2 * t + 1] * sigma]);
                let score = match center {
                    Some(c) => dsvdd_score(&zb, c),
                    None => mean_distance(&s.window.target_positions(), &recon),
                };
                out.push(Evaluation { z: zb, recon, score });
            }
        }
        Ok(out)
    }

    /// Latent codes; needs no center, so it also serves center initialization.
    pub fn latents(&self, samples: &[Sample]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(samples.len());
        for chunk in samples.chunks(SCORE_CHUNK) {
            let refs: Vec<&Sample> = chunk.iter().collect();
            let mut g = Graph::new();
            let (z, _) = self.net.forward(&mut g, &self.store, &refs, &self.norm)?;
            let z = g.value(z);
            out.extend((0..chunk.len()).map(|b| z.row_slice(b).to_vec()));
        }
        Ok(out)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let d = &self.descriptor;
        let mut header = CheckpointHeader::new(d.architecture.name(), d.objective.name());
        header.dims.insert("embed".into(), d.dims.embed);
        header.dims.insert("hidden".into(), d.dims.hidden);
        header.dims.insert("latent".into(), d.dims.latent);
        header.norm_stats.insert("position_scale".into(), self.norm.position_scale);
        header.norm_stats.insert("displacement_scale".into(), self.norm.displacement_scale);
        header.extra = json!({ "dsvdd_center": d.dsvdd_center });
        Checkpoint { header, params: self.store.to_flat() }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let h = &ckpt.header;
        let architecture: Architecture = h.architecture.parse()?;
        let objective: Objective = h.objective.parse()?;
        let dim = |k: &str| h.dims.get(k).copied().ok_or_else(|| ModelError::BadCheckpoint(format!("missing dim {k}")));
        let stat = |k: &str| h.norm_stats.get(k).copied().ok_or_else(|| ModelError::BadCheckpoint(format!("missing norm stat {k}")));
        let dims = Dims { embed: dim("embed")?, hidden: dim("hidden")?, latent: dim("latent")? };
        if dims.latent != dims.hidden {
            return Err(ModelError::BadCheckpoint(format!("latent {} differs from hidden {}", dims.latent, dims.hidden)));
        }
        let center = match h.extra.get("dsvdd_center") {
            None | Some(Value::Null) => None,
            Some(v) => {
                Some(serde_json::from_value::<Vec<f64>>(v.clone()).map_err(|e| ModelError::BadCheckpoint(format!("dsvdd_center: {e}")))?)
            }
        };
        let mut descriptor = ModelDescriptor::new(architecture, objective)?;
        descriptor.dims = dims;
        descriptor.dsvdd_center = center;
        let norm = Normalization { position_scale: stat("position_scale")?, displacement_scale: stat("displacement_scale")? };
        let mut model = DeepModel::new(descriptor, norm, 0)?;
        model.store.load_flat(&ckpt.params)?;
        Ok(model)
    }
}

/// Any scorer: a linear baseline or a trained auto-encoder.
#[derive(Debug, Clone)]
pub enum Model {
    Linear(Architecture),
    Deep(Box<DeepModel>),
}

impl Model {
    pub fn linear(architecture: Architecture) -> Result<Self> {
        if !architecture.is_linear() {
            return Err(ModelError::Unknown { kind: "linear model", name: architecture.name().into() });
        }
        Ok(Model::Linear(architecture))
    }

    pub fn architecture(&self) -> Architecture {
        match self {
            Model::Linear(a) => *a,
            Model::Deep(m) => m.architecture(),
        }
    }

    /// One anomaly score per sample, in input order.
    pub fn score(&self, samples: &[Sample]) -> Result<Vec<f64>> {
        match self {
            Model::Linear(Architecture::Cvm) => Ok(samples.iter().map(|s| cvm_reconstruct(&s.window.target_positions()).1).collect()),
            Model::Linear(_) => Ok(samples.iter().map(|s| lti_reconstruct(&s.window.target_positions()).1).collect()),
            Model::Deep(m) => Ok(m.evaluate(samples)?.into_iter().map(|e| e.score).collect()),
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        match self {
            Model::Linear(a) => Checkpoint { header: CheckpointHeader::new(a.name(), Objective::Recon.name()), params: Vec::new() },
            Model::Deep(m) => m.to_checkpoint(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let architecture: Architecture = ckpt.header.architecture.parse()?;
        if architecture.is_linear() {
            return Model::linear(architecture);
        }
        Ok(Model::Deep(Box::new(DeepModel::from_checkpoint(ckpt)?)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Model::from_checkpoint(&load_checkpoint(path)?)
    }

    /// [`Model::load`] that fails with an architecture mismatch unless the
    /// checkpoint holds `expected`.
    pub fn load_expecting(path: &Path, expected: Architecture) -> Result<Self> {
        let ckpt = load_checkpoint(path)?;
        ckpt.expect_architecture(expected.name())?;
        Model::from_checkpoint(&ckpt)
    }
}
