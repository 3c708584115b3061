use maad_core::{window_iter, Scene, FIRST_SCORED_FRAME};
use maad_models::{Architecture, Model, Sample};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Result;

/// Per-frame anomaly scores of one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub scene_id: String,
    /// `(frame, score)`, frames strictly increasing from 15.
    pub entries: Vec<(usize, f64)>,
}

/// Anything that maps windows to anomaly scores.
pub trait Scorer: Sync {
    /// Whether samples need their lane context.
    fn uses_map(&self) -> bool;

    /// One score per sample, in input order.
    fn score_samples(&self, samples: &[Sample]) -> Result<Vec<f64>>;
}

impl Scorer for Model {
    fn uses_map(&self) -> bool {
        self.architecture() == Architecture::LanegcnAe
    }

    fn score_samples(&self, samples: &[Sample]) -> Result<Vec<f64>> {
        Ok(self.score(samples)?)
    }
}

/// Scores every frame from 15 to the end of `scene` with the window ending there.
pub fn score_scene<S: Scorer + ?Sized>(model: &S, scene: &Scene) -> Result<ScoreSeries> {
    let with_map = model.uses_map();
    let samples = window_iter(scene)?
        .map(|w| {
            let w = w?;
            Ok(if with_map { Sample::new(w, &scene.lane_graph) } else { Sample::without_map(w) })
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = model.score_samples(&samples)?;
    let entries = scores.into_iter().enumerate().map(|(k, s)| (FIRST_SCORED_FRAME + k, s)).collect();
    Ok(ScoreSeries { scene_id: scene.scene_id.clone(), entries })
}

/// [`score_scene`] over many scenes in parallel, results in input order.
pub fn score_scenes<S: Scorer + ?Sized>(model: &S, scenes: &[Scene]) -> Result<Vec<ScoreSeries>> {
    scenes.par_iter().map(|s| score_scene(model, s)).collect()
}
