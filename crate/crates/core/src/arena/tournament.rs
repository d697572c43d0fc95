//! Round-robin play with forced openings.

use std::sync::mpsc;

use crate::derive_seed;
use crate::hex::{to_notation, Action, GameState, Player};

use super::agent::Agent;
use super::ArenaError;

pub const MATCH_CSV_HEADER: &str = "agent_a,agent_b,opening,black_agent,winner";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchRecord {
    pub agent_a: String,
    pub agent_b: String,
    pub opening: Action,
    pub black_agent: String,
    pub winner: String,
}

impl MatchRecord {
    pub fn loser(&self) -> &str {
        if self.winner == self.agent_a {
            &self.agent_b
        } else {
            &self.agent_a
        }
    }
}

/// One scheduled game: agents by index, `a` as Black when `a_black`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub round: u32,
    pub a: usize,
    pub b: usize,
    pub opening: Action,
    pub a_black: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TournamentConfig {
    pub size: usize,
    pub seed: u64,
    /// Complete round robins to play; each has its own game seeds.
    pub rounds: u32,
    pub workers: usize,
}

impl TournamentConfig {
    pub fn new(size: usize, seed: u64) -> Self {
        TournamentConfig {
            size,
            seed,
            rounds: 1,
            workers: 1,
        }
    }
}

/// Every pair plays each opening twice per round, once with each colour.
pub fn schedule(agents: usize, size: usize, rounds: u32) -> Vec<Fixture> {
    let mut out = Vec::new();
    for round in 0..rounds {
        for a in 0..agents {
            for b in a + 1..agents {
                for cell in 0..size * size {
                    for a_black in [true, false] {
                        out.push(Fixture {
                            round,
                            a,
                            b,
                            opening: Action(cell as u16),
                            a_black,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Plays one game in which Black's first move is `opening`. Returns the winner.
pub fn play_game(
    black: &dyn Agent,
    white: &dyn Agent,
    size: usize,
    opening: Action,
    seed: u64,
) -> Result<Player, ArenaError> {
    let mut state = GameState::new(size)?;
    state.play(opening)?;
    let mut sessions = [black.session(), white.session()];
    let mut ply = 1u64;
    while state.winner().is_none() {
        let side = match state.to_move() {
            Player::Black => 0,
            Player::White => 1,
        };
        let action = sessions[side].choose(&state, derive_seed(seed, &[ply]))?;
        state.play(action)?;
        ply += 1;
    }
    Ok(state.winner().expect("finished game"))
}

fn play_fixture(
    agents: &[&dyn Agent],
    ids: &[String],
    f: &Fixture,
    config: &TournamentConfig,
) -> Result<MatchRecord, ArenaError> {
    let (black, white) = if f.a_black { (f.a, f.b) } else { (f.b, f.a) };
    let seed = derive_seed(
        config.seed,
        &[
            f.round as u64,
            f.a as u64,
            f.b as u64,
            f.opening.0 as u64,
            f.a_black as u64,
        ],
    );
    let winner = play_game(agents[black], agents[white], config.size, f.opening, seed)?;
    let winner = if winner == Player::Black {
        black
    } else {
        white
    };
    Ok(MatchRecord {
        agent_a: ids[f.a].clone(),
        agent_b: ids[f.b].clone(),
        opening: f.opening,
        black_agent: ids[black].clone(),
        winner: ids[winner].clone(),
    })
}

/// Plays the full schedule. Records come back in schedule order whatever
/// the worker count.
pub fn round_robin(
    agents: &[&dyn Agent],
    config: &TournamentConfig,
) -> Result<Vec<MatchRecord>, ArenaError> {
    if agents.len() < 2 {
        return Err(ArenaError::TooFewAgents(agents.len()));
    }
    let ids: Vec<String> = agents.iter().map(|a| a.id()).collect();
    for (i, id) in ids.iter().enumerate() {
        if ids[..i].contains(id) {
            return Err(ArenaError::DuplicateAgent(id.clone()));
        }
    }
    GameState::new(config.size)?;
    let fixtures = schedule(agents.len(), config.size, config.rounds);
    let workers = config.workers.clamp(1, fixtures.len().max(1));
    if workers == 1 {
        return fixtures
            .iter()
            .map(|f| play_fixture(agents, &ids, f, config))
            .collect();
    }
    let mut slots: Vec<Option<Result<MatchRecord, ArenaError>>> =
        (0..fixtures.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for w in 0..workers {
            let tx = tx.clone();
            let (fixtures, ids) = (&fixtures, &ids);
            scope.spawn(move || {
                for i in (w..fixtures.len()).step_by(workers) {
                    if tx
                        .send((i, play_fixture(agents, ids, &fixtures[i], config)))
                        .is_err()
                    {
                        break;
                    }
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            slots[i] = Some(r);
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every fixture reported"))
        .collect()
}

pub fn matches_to_csv(records: &[MatchRecord], size: usize) -> String {
    let mut out = String::from(MATCH_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.agent_a,
            r.agent_b,
            to_notation(r.opening, size),
            r.black_agent,
            r.winner
        ));
    }
    out
}
