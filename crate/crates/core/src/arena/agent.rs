//! Tournament participants.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hex::{Action, GameState};
use crate::search::{search_with, select_action, Algorithm, Evaluator, SearchConfig, SelectMode};
use crate::Net;

use super::ArenaError;

/// Something that can play games. Each game gets a fresh [`Session`] so
/// per-game caches never leak between games.
pub trait Agent: Sync {
    fn id(&self) -> String;
    fn session(&self) -> Box<dyn Session + '_>;
}

pub trait Session {
    /// Move for the player to move in `state`. `seed` is fixed per game and ply.
    fn choose(&mut self, state: &GameState, seed: u64) -> Result<Action, ArenaError>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AgentKind {
    /// Greedy on the network prior, no search.
    Raw,
    Mcs,
    Mcts,
    Pgs {
        alpha: f64,
    },
    /// PGS adapting the whole network.
    PgsFull {
        alpha: f64,
    },
}

/// Parsed agent name: `raw | mcs | mcts | pgs:ALPHA | pgs-uf:ALPHA`, with an
/// optional `@K` suffix selecting the K-th network (default 0).
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec {
    pub kind: AgentKind,
    pub net: usize,
    label: String,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> AgentSpec {
        let label = match kind {
            AgentKind::Raw => "raw".to_string(),
            AgentKind::Mcs => "mcs".to_string(),
            AgentKind::Mcts => "mcts".to_string(),
            AgentKind::Pgs { alpha } => format!("pgs:{alpha:e}"),
            AgentKind::PgsFull { alpha } => format!("pgs-uf:{alpha:e}"),
        };
        AgentSpec {
            kind,
            net: 0,
            label,
        }
    }

    pub fn on_net(mut self, net: usize) -> AgentSpec {
        self.label = format!("{}@{net}", self.label.split('@').next().unwrap_or_default());
        self.net = net;
        self
    }

    /// Family name used in scaling tables: `raw`, `mcs`, `mcts`, `pgs`, `pgs-uf`.
    pub fn family(&self) -> &'static str {
        match self.kind {
            AgentKind::Raw => "raw",
            AgentKind::Mcs => "mcs",
            AgentKind::Mcts => "mcts",
            AgentKind::Pgs { .. } => "pgs",
            AgentKind::PgsFull { .. } => "pgs-uf",
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for AgentSpec {
    type Err = ArenaError;

    fn from_str(text: &str) -> Result<AgentSpec, ArenaError> {
        let label = text.trim().to_ascii_lowercase();
        let unknown = || ArenaError::UnknownAgent(text.to_string());
        let (body, net) = match label.split_once('@') {
            Some((b, n)) => (b, n.parse::<usize>().map_err(|_| unknown())?),
            None => (label.as_str(), 0),
        };
        let alpha = |a: &str| -> Result<f64, ArenaError> {
            let v: f64 = a.parse().map_err(|_| unknown())?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(unknown())
            }
        };
        let kind = match body.split_once(':') {
            None => match body {
                "raw" => AgentKind::Raw,
                "mcs" => AgentKind::Mcs,
                "mcts" => AgentKind::Mcts,
                _ => return Err(unknown()),
            },
            Some(("pgs", a)) => AgentKind::Pgs { alpha: alpha(a)? },
            Some(("pgs-uf", a)) => AgentKind::PgsFull { alpha: alpha(a)? },
            Some(_) => return Err(unknown()),
        };
        Ok(AgentSpec { kind, net, label })
    }
}

pub fn parse_agent_list(text: &str) -> Result<Vec<AgentSpec>, ArenaError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// A network-backed agent, searching with `search` unless it is `raw`.
pub struct NetAgent<'n> {
    pub spec: AgentSpec,
    net: &'n Net,
    search: SearchConfig,
}

impl<'n> NetAgent<'n> {
    pub fn new(spec: AgentSpec, net: &'n Net, search: SearchConfig) -> Result<Self, ArenaError> {
        let mut search = search;
        match spec.kind {
            AgentKind::Pgs { alpha } => {
                search.pgs_alpha = Some(alpha);
                search.pgs_full_network = false;
            }
            AgentKind::PgsFull { alpha } => {
                search.pgs_alpha = Some(alpha);
                search.pgs_full_network = true;
            }
            _ => {}
        }
        search.validate()?;
        Ok(NetAgent { spec, net, search })
    }

    /// Builds agents for `specs`, resolving each `@K` against `nets`.
    pub fn build_all(
        specs: &[AgentSpec],
        nets: &'n [Net],
        search: &SearchConfig,
    ) -> Result<Vec<Self>, ArenaError> {
        specs
            .iter()
            .map(|s| {
                let net = nets.get(s.net).ok_or_else(|| {
                    ArenaError::UnknownAgent(format!("{s}: no network #{}", s.net))
                })?;
                NetAgent::new(s.clone(), net, search.clone())
            })
            .collect()
    }
}

struct NetSession<'a> {
    agent: &'a NetAgent<'a>,
    eval: Evaluator<'a, f32>,
}

impl Session for NetSession<'_> {
    fn choose(&mut self, state: &GameState, seed: u64) -> Result<Action, ArenaError> {
        let algorithm = match self.agent.spec.kind {
            AgentKind::Raw => return Ok(self.eval.best_action(state)?),
            AgentKind::Mcs => Algorithm::Mcs,
            AgentKind::Mcts => Algorithm::Mcts,
            AgentKind::Pgs { .. } | AgentKind::PgsFull { .. } => Algorithm::Pgs,
        };
        let config = self.agent.search.clone().with_seed(seed);
        let result = search_with(algorithm, state, &mut self.eval, &config)?;
        let mut unused = ChaCha8Rng::seed_from_u64(seed);
        Ok(select_action(&result, SelectMode::Greedy, &mut unused))
    }
}

impl Agent for NetAgent<'_> {
    fn id(&self) -> String {
        self.spec.to_string()
    }

    fn session(&self) -> Box<dyn Session + '_> {
        Box::new(NetSession {
            agent: self,
            eval: Evaluator::new(self.net),
        })
    }
}

/// Instant stand-in agent: plays the lowest-index legal cell.
pub struct FirstLegal(pub String);

impl Agent for FirstLegal {
    fn id(&self) -> String {
        self.0.clone()
    }

    fn session(&self) -> Box<dyn Session + '_> {
        Box::new(FirstLegalSession)
    }
}

struct FirstLegalSession;

impl Session for FirstLegalSession {
    fn choose(&mut self, state: &GameState, _seed: u64) -> Result<Action, ArenaError> {
        Ok(state.legal_moves()[0])
    }
}

/// Instant stand-in agent: plays a uniformly random legal cell.
pub struct UniformRandom(pub String);

impl Agent for UniformRandom {
    fn id(&self) -> String {
        self.0.clone()
    }

    fn session(&self) -> Box<dyn Session + '_> {
        Box::new(UniformSession)
    }
}

struct UniformSession;

impl Session for UniformSession {
    fn choose(&mut self, state: &GameState, seed: u64) -> Result<Action, ArenaError> {
        let moves = state.legal_moves();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(moves[rng.random_range(0..moves.len())])
    }
}
