use maad_core::{to_target_frame, Scene, Window, FIRST_SCORED_FRAME};
use maad_diffcalc::{Adam, AdamConfig, Graph, ParamStore, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dsvdd::{dsvdd_score, mean_code};
use crate::{Architecture, DeepModel, ModelDescriptor, ModelError, Normalization, Objective, Result, Sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_decayed: f64,
    /// Epochs run at `lr` before switching to `lr_decayed`.
    pub decay_after: usize,
    pub seed: u64,
    /// Random clips drawn from every training scene per epoch.
    pub clips_per_scene: usize,
    /// Upper bound on the windows averaged into the deep SVDD center.
    pub center_samples: usize,
    /// Reconstruction-only epochs run before the deep SVDD center is
    /// computed; ignored for the reconstruction objective.
    pub pretrain_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 36,
            batch_size: 32,
            lr: 1e-3,
            lr_decayed: 1e-4,
            decay_after: 32,
            seed: 0,
            clips_per_scene: 1,
            center_samples: 10_000,
            pretrain_epochs: 8,
        }
    }
}

impl TrainConfig {
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch > self.decay_after {
            self.lr_decayed
        } else {
            self.lr
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    pub lr: f64,
    /// Joint training loss `loss_r + loss_a`, averaged over the epoch's windows.
    pub loss: f64,
    pub loss_r: f64,
    pub loss_a: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Parameters of the best validation epoch.
    pub model: DeepModel,
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
    /// Mean distance from the center over the center windows, right after
    /// center initialization and at the best epoch (deep SVDD only).
    pub center_distance_init: Option<f64>,
    pub center_distance_best: Option<f64>,
}

/// `(scene, end_frame)` of every window whose target is present at its last frame.
pub fn training_windows(scenes: &[Scene]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, scene) in scenes.iter().enumerate() {
        let Some(target) = scene.target() else { continue };
        for f in FIRST_SCORED_FRAME..scene.len() {
            if target.states[f].valid {
                out.push((i, f));
            }
        }
    }
    out
}

fn sample(scenes: &[Scene], (i, f): (usize, usize), arch: Architecture) -> Result<Sample> {
    let window = to_target_frame(&scenes[i], f)?;
    Ok(match arch {
        Architecture::LanegcnAe => Sample::new(window, &scenes[i].lane_graph),
        _ => Sample::without_map(window),
    })
}

fn samples(scenes: &[Scene], picks: &[(usize, usize)], arch: Architecture) -> Result<Vec<Sample>> {
    picks.iter().map(|&p| sample(scenes, p, arch)).collect()
}

/// Uniform subsample of at most `cap` items, order preserved.
fn subsample<T: Copy>(items: &[T], cap: usize, rng: &mut impl Rng) -> Vec<T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let mut idx = rand::seq::index::sample(rng, items.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i]).collect()
}

/// Mean latent code over `samples`.
pub fn init_center(model: &DeepModel, samples: &[Sample]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    mean_code(&model.latents(samples)?)
}

fn mean_center_distance(model: &DeepModel, samples: &[Sample], center: &[f64]) -> Result<f64> {
    let codes = model.latents(samples)?;
    Ok(codes.iter().map(|z| dsvdd_score(z, center)).sum::<f64>() / codes.len() as f64)
}

struct Losses {
    total: f64,
    recon: f64,
    center: f64,
}

/// Builds the loss graph of one batch; returns it with the joint loss node.
fn batch_losses(model: &DeepModel, batch: &[Sample], joint: bool) -> Result<(Graph, Var, Losses)> {
    let refs: Vec<&Sample> = batch.iter().collect();
    let mut g = Graph::new();
    let out = model.forward(&mut g, &refs)?;
    let l_r = model.recon_loss(&mut g, &out)?;
    let (loss, l_a) = match model.descriptor.objective {
        Objective::Dsvdd if joint => {
            let l_a = model.dsvdd_loss(&mut g, &out)?;
            (g.add(l_r, l_a)?, Some(l_a))
        }
        _ => (l_r, None),
    };
    let losses = Losses { total: g.value(loss).item(), recon: g.value(l_r).item(), center: l_a.map_or(0.0, |v| g.value(v).item()) };
    Ok((g, loss, losses))
}

fn validation_loss(model: &DeepModel, val: &[Sample], batch_size: usize) -> Result<f64> {
    let mut sum = 0.0;
    for chunk in val.chunks(batch_size.max(1)) {
        sum += batch_losses(model, chunk, true)?.2.total * chunk.len() as f64;
    }
    Ok(sum / val.len().max(1) as f64)
}

struct EpochData<'a> {
    scenes: &'a [Scene],
    /// Scored frames of every scene.
    frames: &'a [Vec<usize>],
    config: &'a TrainConfig,
}

/// One pass over fresh random clips; returns the window-weighted mean
/// joint, reconstruction and center losses.
fn run_epoch(
    model: &mut DeepModel,
    adam: &mut Adam,
    rng: &mut ChaCha8Rng,
    data: &EpochData,
    epoch: usize,
    joint: bool,
) -> Result<(f64, f64, f64)> {
    let config = data.config;
    let arch = model.architecture();
    let mut picks = Vec::with_capacity(data.scenes.len() * config.clips_per_scene);
    for (i, frames) in data.frames.iter().enumerate() {
        if frames.is_empty() {
            continue;
        }
        for _ in 0..config.clips_per_scene {
            picks.push((i, frames[rng.gen_range(0..frames.len())]));
        }
    }
    picks.shuffle(rng);
    let (mut sum, mut sum_r, mut sum_a) = (0.0, 0.0, 0.0);
    for chunk in picks.chunks(config.batch_size) {
        let batch = samples(data.scenes, chunk, arch)?;
        let (mut g, loss, losses) = batch_losses(model, &batch, joint)?;
        if !losses.total.is_finite() {
            return Err(ModelError::Diverged { epoch, what: "loss" });
        }
        model.store.zero_grad();
        g.backward(loss, &mut model.store)?;
        adam.step(&mut model.store);
        if !model.store.all_finite() {
            return Err(ModelError::Diverged { epoch, what: "parameters" });
        }
        let n = chunk.len() as f64;
        sum += losses.total * n;
        sum_r += losses.recon * n;
        sum_a += losses.center * n;
    }
    let n = picks.len() as f64;
    Ok((sum / n, sum_r / n, sum_a / n))
}

/// Trains `descriptor` on unlabeled scenes and returns the parameters of the
/// epoch with the lowest validation loss (training loss when `val_scenes` is
/// empty).
pub fn train(descriptor: ModelDescriptor, train_scenes: &[Scene], val_scenes: &[Scene], config: &TrainConfig) -> Result<TrainReport> {
    let arch = descriptor.architecture;
    if arch.is_linear() {
        return Err(ModelError::NotTrainable(arch.name()));
    }
    if config.batch_size == 0 || config.clips_per_scene == 0 {
        return Err(ModelError::BadConfig("batch_size and clips_per_scene must be positive".into()));
    }
    let all = training_windows(train_scenes);
    if all.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let windows: Vec<Window> = all.iter().map(|&(i, f)| to_target_frame(&train_scenes[i], f)).collect::<maad_core::Result<_>>()?;
    let norm = Normalization::fit(&windows);
    drop(windows);

    let mut model = DeepModel::new(descriptor, norm, config.seed)?;
    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(config.seed);
        r.set_stream(k);
        r
    };
    let (mut clip_rng, mut val_rng, mut center_rng, mut pretrain_rng) = (stream(1), stream(2), stream(3), stream(4));

    let mut per_scene: Vec<Vec<usize>> = vec![Vec::new(); train_scenes.len()];
    for &(i, f) in &all {
        per_scene[i].push(f);
    }
    let val_windows = training_windows(val_scenes);
    let mut val_frames: Vec<Vec<usize>> = vec![Vec::new(); val_scenes.len()];
    for &(i, f) in &val_windows {
        val_frames[i].push(f);
    }
    let val_picks: Vec<(usize, usize)> =
        val_frames.iter().enumerate().filter(|(_, fs)| !fs.is_empty()).map(|(i, fs)| (i, fs[val_rng.gen_range(0..fs.len())])).collect();
    let val = samples(val_scenes, &val_picks, arch)?;

    let epoch_data = EpochData { scenes: train_scenes, frames: &per_scene, config };
    let mut center_set = Vec::new();
    let mut center_distance_init = None;
    if model.descriptor.objective == Objective::Dsvdd {
        // the center is taken from a reconstruction-trained encoder, not a random one
        let mut adam = Adam::new(AdamConfig { lr: config.lr, ..AdamConfig::default() });
        for epoch in 1..=config.pretrain_epochs {
            let (_, loss_r, _) = run_epoch(&mut model, &mut adam, &mut pretrain_rng, &epoch_data, epoch, false)?;
            log::info!("{arch} pretrain epoch {epoch}/{}: recon {loss_r:.6}", config.pretrain_epochs);
        }
        center_set = samples(train_scenes, &subsample(&all, config.center_samples, &mut center_rng), arch)?;
        let c = init_center(&model, &center_set)?;
        center_distance_init = Some(mean_center_distance(&model, &center_set, &c)?);
        model.descriptor.dsvdd_center = Some(c);
    }

    let mut adam = Adam::new(AdamConfig { lr: config.lr, ..AdamConfig::default() });
    let mut logs = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ParamStore)> = None;
    for epoch in 1..=config.epochs {
        let lr = config.lr_at(epoch);
        adam.set_lr(lr);
        let (loss, loss_r, loss_a) = run_epoch(&mut model, &mut adam, &mut clip_rng, &epoch_data, epoch, true)?;
        let val_loss = if val.is_empty() { loss } else { validation_loss(&model, &val, config.batch_size)? };
        log::info!(
            "{} epoch {epoch}/{}: lr {lr:e} loss {loss:.6} (recon {loss_r:.6}, center {loss_a:.6}) val {val_loss:.6}",
            arch,
            config.epochs
        );
        logs.push(EpochLog { epoch, lr, loss, loss_r, loss_a, val_loss });
        if best.as_ref().is_none_or(|(v, _, _)| val_loss < *v) {
            best = Some((val_loss, epoch, model.store.clone()));
        }
    }

    let best_epoch = match best {
        Some((_, epoch, store)) => {
            model.store = store;
            epoch
        }
        None => 0,
    };
    let center_distance_best = match &model.descriptor.dsvdd_center {
        Some(c) => Some(mean_center_distance(&model, &center_set, c)?),
        None => None,
    };
    Ok(TrainReport { model, epochs: logs, best_epoch, center_distance_init, center_distance_best })
}

impl TrainReport {
    /// Training summary for the checkpoint header.
    pub fn summary(&self, config: &TrainConfig) -> serde_json::Value {
        json!({
            "best_epoch": self.best_epoch,
            "config": config,
            "center_distance_init": self.center_distance_init,
            "center_distance_best": self.center_distance_best,
        })
    }

    /// Checkpoint of the selected parameters with the training summary under `extra.training`.
    pub fn checkpoint(&self, config: &TrainConfig) -> maad_dataio::Checkpoint {
        let mut ckpt = self.model.to_checkpoint();
        ckpt.header.extra["training"] = self.summary(config);
        ckpt
    }
}
