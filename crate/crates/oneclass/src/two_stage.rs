use std::path::Path;

use maad_dataio::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointHeader};
use maad_eval::Scorer;
use maad_models::{Architecture, DeepModel, Sample};
use serde_json::json;

use crate::{OcSvmModel, OneClassError, Result};

/// Architecture tag of two-stage checkpoints.
pub const OCSVM_TAG: &str = "ocsvm";

/// A frozen encoder whose latent codes are scored by a one-class SVM.
#[derive(Debug, Clone)]
pub struct TwoStage {
    pub encoder: DeepModel,
    pub svm: OcSvmModel,
}

impl TwoStage {
    pub fn score(&self, samples: &[Sample]) -> Result<Vec<f64>> {
        Ok(self.encoder.latents(samples)?.iter().map(|z| self.svm.score(z)).collect())
    }

    /// The encoder parameters with the SVM and the encoder header under `extra`.
    pub fn to_checkpoint(&self) -> Checkpoint {
        let enc = self.encoder.to_checkpoint();
        let mut header = CheckpointHeader::new(OCSVM_TAG, self.encoder.architecture().name());
        header.extra = json!({ "encoder": enc.header, "ocsvm": self.svm });
        Checkpoint { header, params: enc.params }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_architecture(OCSVM_TAG)?;
        let field = |k: &str| ckpt.header.extra.get(k).cloned().ok_or_else(|| OneClassError::BadCheckpoint(format!("missing {k}")));
        let header: CheckpointHeader =
            serde_json::from_value(field("encoder")?).map_err(|e| OneClassError::BadCheckpoint(format!("encoder header: {e}")))?;
        let svm: OcSvmModel = serde_json::from_value(field("ocsvm")?).map_err(|e| OneClassError::BadCheckpoint(format!("ocsvm: {e}")))?;
        let encoder = DeepModel::from_checkpoint(&Checkpoint { header, params: ckpt.params.clone() })?;
        if svm.standardizer.mean.len() != encoder.descriptor.dims.latent {
            return Err(OneClassError::DimensionMismatch { expected: encoder.descriptor.dims.latent, found: svm.standardizer.mean.len() });
        }
        Ok(TwoStage { encoder, svm })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(save_checkpoint(&self.to_checkpoint(), path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        TwoStage::from_checkpoint(&load_checkpoint(path)?)
    }
}

impl Scorer for TwoStage {
    fn uses_map(&self) -> bool {
        self.encoder.architecture() == Architecture::LanegcnAe
    }

    fn score_samples(&self, samples: &[Sample]) -> maad_eval::Result<Vec<f64>> {
        Ok(self.encoder.latents(samples)?.iter().map(|z| self.svm.score(z)).collect())
    }
}
