//! Reconstruction and one-class trajectory models.
//!
//! Two linear baselines (`cvm`, `lti`) need no training. Three learned
//! auto-encoders (`seq2seq`, `stgae`, `lanegcn_ae`) are trained either on the
//! reconstruction loss alone or jointly with a deep SVDD term that pulls the
//! latent code towards a fixed center.
//!
//! Every model consumes a [`Sample`]: a 16-frame [`maad_core::Window`] in the
//! target-centric frame, plus the lane segments around the target.

mod descriptor;
mod dsvdd;
mod error;
pub mod layers;
mod linear;
mod model;
mod nets;
mod sample;
mod train;

pub use descriptor::{Architecture, Dims, ModelDescriptor, Normalization, Objective};
pub use dsvdd::{dsvdd_loss, dsvdd_score};
pub use error::ModelError;
pub use linear::{cvm_reconstruct, lti_reconstruct, mean_distance, recon_loss};
pub use model::{DeepModel, Evaluation, Model, Output};
pub use sample::{LaneNode, Sample, LANE_NODE_LENGTH, LANE_RADIUS};
pub use train::{init_center, train, training_windows, EpochLog, TrainConfig, TrainReport};

pub type Result<T> = std::result::Result<T, ModelError>;
