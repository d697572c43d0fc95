//! Expert Iteration: self-play with a search expert, a replay buffer of
//! (state, search policy, outcome) examples, calibrated resignation, and
//! apprentice training of the network on the buffer.

mod buffer;
mod config;
mod resign;
mod run;
mod selfplay;

use thiserror::Error;

use crate::hex::HexError;
use crate::net::NetError;
use crate::search::SearchError;

pub use buffer::{training_examples, ReplayBuffer, TrainingExample};
pub use config::ExitConfig;
pub use resign::{
    calibrate_resign_threshold, false_positive_rate, winner_min_value, ResignConfig, ResignError,
    MAX_THRESHOLD,
};
pub use run::{
    checkpoint_paths, exit_run, list_checkpoints, read_manifest, Checkpoint, EpochSummary, ExitRun,
};
pub use selfplay::self_play_game;

#[derive(Debug, Error)]
pub enum ExitError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("bad game record: {0}")]
    Record(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Hex(#[from] HexError),
}
