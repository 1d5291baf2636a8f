//! A deliberately small neural-network engine: embeddings, dense layers,
//! layer normalization, dropout, multi-head self-attention, binary
//! cross-entropy and Adam, each with a hand-written backward pass.
//!
//! Every op is single-threaded and every random draw goes through [`Rng`],
//! so a forward/backward pass is a pure function of parameters, inputs and
//! seed. [`gradcheck`] verifies the backward passes against central finite
//! differences.

pub mod checkpoint;
pub mod gradcheck;
mod layers;
mod loss;
mod optim;
mod param;
mod rng;
mod scalar;
mod tensor;

pub use layers::*;
pub use loss::{bce_loss, PROB_CLAMP};
pub use optim::{Adam, AdamConfig};
pub use param::{Module, Parameter};
pub use rng::{mix_seed, Rng};
pub use scalar::Scalar;
pub use tensor::{matmul, Tensor};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
