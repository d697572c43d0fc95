//! Hex rules, notation, network encoding and game records.

mod board;
mod encode;
mod notation;
mod record;

use thiserror::Error;

pub use board::{Action, Cell, GameState, Player, PositionKey, MAX_CELLS, MAX_SIZE, MIN_SIZE};
pub use encode::{canonical_action, canonical_index, canonical_mask, encode, encode_into, PLANES};
pub use notation::{from_notation, parse_moves, to_notation};
pub use record::{read_records, GameRecord};

#[derive(Debug, Error)]
pub enum HexError {
    #[error("board size {0} outside supported range {MIN_SIZE}..={MAX_SIZE}")]
    BoardSize(usize),
    #[error("cell {0} is occupied")]
    Occupied(usize),
    #[error("cell {0} is off the board")]
    OutOfRange(usize),
    #[error("game is already decided")]
    GameOver,
    #[error("malformed move token {0:?}")]
    Notation(String),
    #[error("move {0:?} is off a {1}x{1} board")]
    NotationRange(String, usize),
    #[error("bad game record: {0}")]
    Record(String),
}

/// Starts a game on an empty `size × size` board with Black to move.
pub fn new_game(size: usize) -> Result<GameState, HexError> {
    GameState::new(size)
}
