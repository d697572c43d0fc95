//! The three searchers: MCTS, and the root-bandit pair MCS and PGS.
//!
//! All of them select at the root with PUCT, run simulations in batches with
//! virtual losses and evaluate leaves with a frozen network. MCTS grows a
//! tree; MCS samples below the root from the network policy; PGS samples
//! from a private copy of the policy head that REINFORCE adapts after every
//! simulation. PGS with a zero learning rate reproduces MCS exactly.

mod bandit;
mod config;
mod eval;
mod mcts;
mod noise;
mod puct;
mod result;
mod trie;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hex::{GameState, HexError};
use crate::net::{NetError, PolicyValueNet};
use crate::Scalar;

pub use bandit::RootBandit;
pub use config::SearchConfig;
pub use eval::Evaluator;
pub use mcts::Mcts;
pub use noise::{apply_root_noise, mix_noise, sample_dirichlet, NoiseConfig};
pub use puct::{EdgeStats, PuctParams, TreeNode};
pub use result::{select_action, SearchResult, SelectMode};
pub use trie::{simulate_until_unique, SequenceTrie, Simulation};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("cannot search from a finished game")]
    TerminalRoot,
    #[error("policy gradient search needs pgs_alpha")]
    MissingAlpha,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Hex(#[from] HexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mcs,
    Mcts,
    Pgs,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Mcs => "mcs",
            Algorithm::Mcts => "mcts",
            Algorithm::Pgs => "pgs",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mcs" => Ok(Algorithm::Mcs),
            "mcts" => Ok(Algorithm::Mcts),
            "pgs" => Ok(Algorithm::Pgs),
            other => Err(format!("unknown search algorithm `{other}`")),
        }
    }
}

/// A search in progress, advanced one batch at a time.
pub trait Searcher {
    fn run_batch(&mut self, batch_size: usize) -> Result<(), SearchError>;
    fn completed(&self) -> u32;
    fn pending_virtual_losses(&self) -> u64;
    fn result(&self) -> SearchResult;
}

impl SearchConfig {
    pub fn puct_params(&self) -> PuctParams {
        PuctParams {
            c_puct: self.c_puct,
            unvisited_q: self.unvisited_q,
            virtual_loss_weight: self.virtual_loss_weight,
        }
    }
}

/// Expands the root from the network, mixing in noise if configured.
fn root_node<T: Scalar>(
    eval: &mut Evaluator<'_, T>,
    state: &GameState,
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> Result<TreeNode, SearchError> {
    if state.is_terminal() {
        return Err(SearchError::TerminalRoot);
    }
    let (actions, mut prior, _) = eval.evaluate(state)?;
    if let Some(noise) = &config.dirichlet {
        prior = apply_root_noise(&prior, noise, rng);
    }
    Ok(TreeNode::new(actions, prior, 0))
}

/// Runs batches until `iterations` simulations have completed.
pub fn run_to_completion(
    searcher: &mut impl Searcher,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    while searcher.completed() < config.iterations {
        let left = config.iterations - searcher.completed();
        searcher.run_batch(left.min(config.batch_size) as usize)?;
    }
    Ok(searcher.result())
}

/// Runs `algorithm` from `state` using a shared evaluator.
pub fn search_with<T: Scalar>(
    algorithm: Algorithm,
    state: &GameState,
    eval: &mut Evaluator<'_, T>,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    match algorithm {
        Algorithm::Mcts => run_to_completion(&mut Mcts::new(eval, state, config)?, config),
        Algorithm::Mcs => run_to_completion(&mut RootBandit::mcs(eval, state, config)?, config),
        Algorithm::Pgs => run_to_completion(&mut RootBandit::pgs(eval, state, config)?, config),
    }
}

pub fn mcts_search<T: Scalar>(
    state: &GameState,
    net: &PolicyValueNet<T>,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    search_with(Algorithm::Mcts, state, &mut Evaluator::new(net), config)
}

pub fn mcs_search<T: Scalar>(
    state: &GameState,
    net: &PolicyValueNet<T>,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    search_with(Algorithm::Mcs, state, &mut Evaluator::new(net), config)
}

pub fn pgs_search<T: Scalar>(
    state: &GameState,
    net: &PolicyValueNet<T>,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    search_with(Algorithm::Pgs, state, &mut Evaluator::new(net), config)
}
