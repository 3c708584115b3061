//! A small tape-based reverse-mode differentiation engine over dense 2-D
//! `f64` tensors, with the handful of layers the trajectory auto-encoders
//! need and an Adam optimizer.
//!
//! A [`Graph`] is built fresh for every forward pass. Parameters live in a
//! [`ParamStore`] outside the graph; [`Graph::param`] copies a parameter onto
//! the tape and [`Graph::backward`] accumulates its gradient back into the
//! store.

mod adam;
mod graph;
mod layers;
mod params;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use graph::{Graph, Var};
pub use layers::{Linear, LstmCell, LstmState};
pub use params::{ParamId, ParamStore, Parameter};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    ShapeMismatch { op: &'static str, expected: String, got: String },
    #[error("backward needs a 1x1 loss, got {0}x{1}")]
    NonScalarLoss(usize, usize),
    #[error("parameter buffer holds {got} values, model expects {expected}")]
    ParameterCount { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, DiffError>;
