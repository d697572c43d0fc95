//! Evaluation: round-robin tournaments with forced openings, Bradley-Terry
//! Elo estimation, iteration-scaling experiments and an exact solver for
//! small positions.

mod agent;
mod elo;
mod scaling;
mod solver;
mod tournament;

use thiserror::Error;

use crate::hex::HexError;
use crate::net::NetError;
use crate::search::SearchError;

pub use agent::{
    parse_agent_list, Agent, AgentKind, AgentSpec, FirstLegal, NetAgent, Session, UniformRandom,
};
pub use elo::{
    elo_from_wins, estimate_elo, estimate_elo_for, head_to_head, EloEntry, EloTable,
    ELO_CSV_HEADER, PRIOR_SIGMA,
};
pub use scaling::{
    scaling_experiment, scaling_rows, scaling_to_csv, ScalingPoint, ScalingRow, SCALING_CSV_HEADER,
};
pub use solver::{
    solve, winning_moves, SolvedValue, Solver, DEFAULT_NODE_BUDGET, MAX_EMPTY_CELLS, MAX_FULL_SIZE,
};
pub use tournament::{
    matches_to_csv, play_game, round_robin, schedule, Fixture, MatchRecord, TournamentConfig,
    MATCH_CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("agent `{0}` appears twice")]
    DuplicateAgent(String),
    #[error("a tournament needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("agent `{0}` has no games")]
    NoGames(String),
    #[error("anchor `{0}` does not appear in the records")]
    UnknownAnchor(String),
    #[error("iteration grid is empty")]
    EmptyGrid,
    #[error("solver node budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("position too large to solve: {size}x{size} board with {empty} empty cells")]
    TooLarge { size: usize, empty: usize },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Hex(#[from] HexError),
}
