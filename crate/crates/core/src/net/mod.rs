//! Two-headed policy-value network with hand-written forward and backward
//! passes.
//!
//! The trunk is a stack of 3×3 convolutions with ReLU and no normalization
//! layers. The policy head (1×1 convolution to two channels, then affine to one
//! logit per cell) is a separate parameter struct: it is the only part PGS
//! adapts online, while the frozen trunk's output can be cached per position.

mod cache;
mod forward;
pub mod io;
mod layers;
mod params;
mod reinforce;
mod train;

use thiserror::Error;

pub use cache::FeatureCache;
pub use forward::{policy_head_forward, Evaluation, TrunkFeatures};
pub use io::{load, save};
pub use layers::{masked_softmax, FlopCounter};
pub use params::{
    tensor_layout, Conv, NetConfig, Params, PolicyHead, PolicyValueNet, Trunk, ValueHead,
};
pub use reinforce::{
    reinforce_full_in_place, reinforce_gradient, reinforce_gradient_full, reinforce_in_place,
    reinforce_step, FullStep, TrajectoryStep,
};
pub use train::{loss, loss_and_gradient, train_step, Losses, Sample, SgdMomentum};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid network config: {0}")]
    Config(String),
    #[error("no legal actions")]
    NoLegalActions,
    #[error("action {0} is not legal")]
    IllegalAction(usize),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("empty training batch")]
    EmptyBatch,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a weight file (bad magic)")]
    BadMagic,
    #[error("unsupported weight file version {0}")]
    Version(u32),
    #[error("corrupt weight file: {0}")]
    Corrupt(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}
