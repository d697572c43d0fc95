//! Exact solver for small positions: negamax with alpha-beta over a binary
//! value (Hex has no draws) and a Zobrist-keyed transposition table.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hex::{Action, Cell, GameState, Player, MAX_CELLS};

use super::ArenaError;

pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;
/// Positions with at most this many empty cells are solvable at any size.
pub const MAX_EMPTY_CELLS: usize = 12;
/// Boards up to this size are solvable from any position.
pub const MAX_FULL_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolvedValue {
    /// Winner under perfect play by both sides.
    pub winner: Player,
}

pub struct Solver {
    keys: Vec<[u64; 2]>,
    side: u64,
    table: HashMap<u64, bool>,
    order: Vec<usize>,
    order_size: usize,
    nodes: u64,
    budget: u64,
}

impl Solver {
    pub fn new(budget: u64) -> Solver {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f4e7);
        Solver {
            keys: (0..MAX_CELLS)
                .map(|_| [rng.random(), rng.random()])
                .collect(),
            side: rng.random(),
            table: HashMap::new(),
            order: Vec::new(),
            order_size: 0,
            nodes: 0,
            budget,
        }
    }

    /// Positions expanded so far, across calls.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn hash(&self, state: &GameState) -> u64 {
        let mut h = if state.to_move() == Player::White {
            self.side
        } else {
            0
        };
        for i in 0..state.cell_count() {
            match state.cell(i) {
                Cell::Black => h ^= self.keys[i][0],
                Cell::White => h ^= self.keys[i][1],
                Cell::Empty => {}
            }
        }
        h
    }

    /// Cells sorted by hex distance from the centre, nearest first.
    fn prepare_order(&mut self, n: usize) {
        if self.order_size == n {
            return;
        }
        let dist = |i: usize| {
            let dr = 2 * (i / n) as i64 - (n as i64 - 1);
            let dc = 2 * (i % n) as i64 - (n as i64 - 1);
            dr.abs() + dc.abs() + (dr + dc).abs()
        };
        let mut order: Vec<usize> = (0..n * n).collect();
        order.sort_by_key(|&i| (dist(i), i));
        self.order = order;
        self.order_size = n;
        self.table.clear();
    }

    fn mover_wins(&mut self, state: &GameState, hash: u64) -> Result<bool, ArenaError> {
        if state.is_terminal() {
            return Ok(false);
        }
        if let Some(&v) = self.table.get(&hash) {
            return Ok(v);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(ArenaError::BudgetExceeded(self.budget));
        }
        let colour = usize::from(state.to_move() == Player::White);
        let moves: Vec<usize> = self
            .order
            .iter()
            .copied()
            .filter(|&i| state.is_empty_cell(i))
            .collect();
        let mut children = Vec::with_capacity(moves.len());
        for &i in &moves {
            let child = state.apply_move(Action(i as u16))?;
            if child.is_terminal() {
                self.table.insert(hash, true);
                return Ok(true);
            }
            children.push((child, hash ^ self.keys[i][colour] ^ self.side));
        }
        for (child, child_hash) in children {
            if !self.mover_wins(&child, child_hash)? {
                self.table.insert(hash, true);
                return Ok(true);
            }
        }
        self.table.insert(hash, false);
        Ok(false)
    }

    pub fn solve(&mut self, state: &GameState) -> Result<SolvedValue, ArenaError> {
        check_size(state)?;
        if let Some(winner) = state.winner() {
            return Ok(SolvedValue { winner });
        }
        self.prepare_order(state.size());
        let hash = self.hash(state);
        let mover = state.to_move();
        let winner = if self.mover_wins(state, hash)? {
            mover
        } else {
            mover.opponent()
        };
        Ok(SolvedValue { winner })
    }

    /// Moves after which the player to move still wins with perfect play.
    pub fn winning_moves(&mut self, state: &GameState) -> Result<Vec<Action>, ArenaError> {
        let mover = state.to_move();
        let mut out = Vec::new();
        for a in state.legal_moves() {
            if self.solve(&state.apply_move(a)?)?.winner == mover {
                out.push(a);
            }
        }
        Ok(out)
    }
}

fn check_size(state: &GameState) -> Result<(), ArenaError> {
    let empty =
        state.cell_count() - state.stone_count(Player::Black) - state.stone_count(Player::White);
    if state.size() > MAX_FULL_SIZE && empty > MAX_EMPTY_CELLS {
        return Err(ArenaError::TooLarge {
            size: state.size(),
            empty,
        });
    }
    Ok(())
}

/// Game-theoretic winner of `state`.
pub fn solve(state: &GameState) -> Result<SolvedValue, ArenaError> {
    Solver::new(DEFAULT_NODE_BUDGET).solve(state)
}

/// Legal moves of `state` that preserve a win for the player to move.
pub fn winning_moves(state: &GameState) -> Result<Vec<Action>, ArenaError> {
    Solver::new(DEFAULT_NODE_BUDGET).winning_moves(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain minimax without pruning or tables.
    fn brute(state: &GameState) -> Player {
        if let Some(w) = state.winner() {
            return w;
        }
        let me = state.to_move();
        for a in state.legal_moves() {
            if brute(&state.apply_move(a).unwrap()) == me {
                return me;
            }
        }
        me.opponent()
    }

    #[test]
    fn small_empty_boards_are_first_player_wins() {
        for n in 1..=4 {
            let s = GameState::new_unchecked(n);
            assert_eq!(solve(&s).unwrap().winner, Player::Black, "{n}x{n}");
        }
        assert_eq!(brute(&GameState::new(2).unwrap()), Player::Black);
    }

    #[test]
    fn agrees_with_brute_force_and_is_antisymmetric() {
        use rand::seq::IndexedRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut solver = Solver::new(DEFAULT_NODE_BUDGET);
        for _ in 0..300 {
            let mut s = GameState::new(3).unwrap();
            let plies = rng.random_range(0..6);
            for _ in 0..plies {
                if s.is_terminal() {
                    break;
                }
                s.play(*s.legal_moves().choose(&mut rng).unwrap()).unwrap();
            }
            let v = solver.solve(&s).unwrap().winner;
            assert_eq!(v, brute(&s));
            let swapped = s.colour_swapped_transpose();
            assert_eq!(solve(&swapped).unwrap().winner, v.opponent());
        }
    }

    #[test]
    fn immediate_wins_are_found_at_depth_one() {
        let mut solver = Solver::new(1);
        // Black b1, b2; White a3, c1. Black completes b3.
        let mut cells = vec![Cell::Empty; 9];
        cells[1] = Cell::Black;
        cells[4] = Cell::Black;
        cells[2] = Cell::White;
        cells[6] = Cell::White;
        let s = GameState::from_cells(3, &cells, Player::Black).unwrap();
        assert_eq!(solver.solve(&s).unwrap().winner, Player::Black);
        assert_eq!(solver.nodes(), 1);
    }

    #[test]
    fn budget_and_size_limits_are_errors() {
        let mut solver = Solver::new(10);
        assert!(matches!(
            solver.solve(&GameState::new(4).unwrap()),
            Err(ArenaError::BudgetExceeded(10))
        ));
        assert!(matches!(
            solve(&GameState::new(5).unwrap()),
            Err(ArenaError::TooLarge { .. })
        ));
    }
}
