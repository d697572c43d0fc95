//! Network input encoding.
//!
//! Three planes of `n × n`: stones of the player to move, opponent stones, and
//! a constant plane that is all ones when Black is to move. When White is to
//! move the board is transposed, so the player to move always sees itself
//! connecting top to bottom. Policy indices produced by the network live in
//! the same canonical frame; [`canonical_index`] maps between frames (the map
//! is an involution).

use super::{Action, Cell, GameState, Player};
use crate::Scalar;

pub const PLANES: usize = 3;

#[inline]
pub fn canonical_index(to_move: Player, index: usize, size: usize) -> usize {
    match to_move {
        Player::Black => index,
        Player::White => (index % size) * size + index / size,
    }
}

#[inline]
pub fn canonical_action(state: &GameState, action: Action) -> usize {
    canonical_index(state.to_move(), action.index(), state.size())
}

/// Writes the encoding of `state` into `out` (`PLANES * n²` values).
pub fn encode_into<T: Scalar>(state: &GameState, out: &mut [T]) {
    let n = state.size();
    let cells = n * n;
    assert_eq!(out.len(), PLANES * cells);
    let me = state.to_move();
    let (own, other) = match me {
        Player::Black => (Cell::Black, Cell::White),
        Player::White => (Cell::White, Cell::Black),
    };
    let colour = if me == Player::Black {
        T::one()
    } else {
        T::zero()
    };
    for i in 0..cells {
        let j = canonical_index(me, i, n);
        let c = state.cell(i);
        out[j] = if c == own { T::one() } else { T::zero() };
        out[cells + j] = if c == other { T::one() } else { T::zero() };
        out[2 * cells + j] = colour;
    }
}

pub fn encode<T: Scalar>(state: &GameState) -> Vec<T> {
    let mut out = vec![T::zero(); PLANES * state.cell_count()];
    encode_into(state, &mut out);
    out
}

/// Legal mask in the canonical frame of `state`.
pub fn canonical_mask(state: &GameState) -> Vec<bool> {
    let n = state.size();
    let mut mask = vec![false; n * n];
    if state.is_terminal() {
        return mask;
    }
    for i in 0..n * n {
        if state.is_empty_cell(i) {
            mask[canonical_index(state.to_move(), i, n)] = true;
        }
    }
    mask
}
