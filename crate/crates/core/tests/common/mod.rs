//! Oracles shared by the integration tests and the acceptance suite. Nothing
//! here calls into the code it checks beyond public state accessors.

#![allow(dead_code)]

use hexpgs::hex::{Cell, GameState, Player};
use hexpgs::net::{NetConfig, Params};
use hexpgs::NetF64;
use rand::seq::IndexedRandom;
use rand::Rng;

/// The miniature network used for gradient checks.
pub fn mini_config() -> NetConfig {
    NetConfig {
        size: 3,
        channels: 4,
        trunk_layers: 2,
        value_hidden: 8,
    }
}

pub fn mini_net(seed: u64) -> NetF64 {
    NetF64::init(mini_config(), seed).expect("valid config")
}

/// Does `colour` connect its two edges? Black joins the top and bottom rows,
/// White the left and right columns. Plain depth-first search.
pub fn flood_connects(n: usize, cells: &[Cell], colour: Cell) -> bool {
    let along_rows = colour == Cell::Black;
    let n = n as isize;
    let mut seen = vec![false; cells.len()];
    let mut stack = Vec::new();
    for k in 0..n {
        let (r, c) = if along_rows { (0, k) } else { (k, 0) };
        let i = (r * n + c) as usize;
        if cells[i] == colour {
            seen[i] = true;
            stack.push((r, c));
        }
    }
    while let Some((r, c)) = stack.pop() {
        if (along_rows && r == n - 1) || (!along_rows && c == n - 1) {
            return true;
        }
        for (dr, dc) in [(-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0)] {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr >= n || nc >= n {
                continue;
            }
            let i = (nr * n + nc) as usize;
            if cells[i] == colour && !seen[i] {
                seen[i] = true;
                stack.push((nr, nc));
            }
        }
    }
    false
}

pub fn cells_of(state: &GameState) -> Vec<Cell> {
    (0..state.cell_count()).map(|i| state.cell(i)).collect()
}

pub fn flood_winner(state: &GameState) -> Option<Player> {
    let cells = cells_of(state);
    if flood_connects(state.size(), &cells, Cell::Black) {
        Some(Player::Black)
    } else if flood_connects(state.size(), &cells, Cell::White) {
        Some(Player::White)
    } else {
        None
    }
}

/// A uniformly random legal continuation of `plies` moves, stopping early if
/// the game ends.
pub fn random_play(size: usize, plies: usize, rng: &mut impl Rng) -> GameState {
    let mut s = GameState::new(size).expect("valid size");
    for _ in 0..plies {
        match s.legal_moves().choose(rng) {
            Some(&a) => s.play(a).expect("legal move"),
            None => break,
        }
    }
    s
}

/// `count` non-terminal positions reached by random play.
pub fn random_positions(size: usize, count: usize, rng: &mut impl Rng) -> Vec<GameState> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let plies = rng.random_range(0..size * size);
        let s = random_play(size, plies, rng);
        if !s.is_terminal() {
            out.push(s);
        }
    }
    out
}

/// Plain negamax without pruning or tables: does the player to move win?
pub fn brute_force_mover_wins(state: &GameState) -> bool {
    state.legal_moves().into_iter().any(|a| {
        let next = state.apply_move(a).expect("legal move");
        next.winner().is_some() || !brute_force_mover_wins(&next)
    })
}

fn set<P: Params<f64>>(p: &mut P, mut index: usize, value: f64) {
    for s in p.slices_mut() {
        if index < s.len() {
            s[index] = value;
            return;
        }
        index -= s.len();
    }
    panic!("parameter index {index} out of range");
}

pub const FD_EPS: f64 = 1e-5;

/// Relative error with a small floor on the denominator, so coordinates
/// whose true gradient is exactly zero compare absolutely.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Largest relative error between `analytic` and central differences of `f`
/// at `at`, over every scalar parameter.
pub fn max_fd_error<P: Params<f64> + Clone>(at: &P, analytic: &P, f: impl Fn(&P) -> f64) -> f64 {
    let grad = analytic.flat();
    let base = at.flat();
    assert_eq!(grad.len(), base.len());
    let mut probe = at.clone();
    let mut worst: f64 = 0.0;
    for (i, &g) in grad.iter().enumerate() {
        set(&mut probe, i, base[i] + FD_EPS);
        let up = f(&probe);
        set(&mut probe, i, base[i] - FD_EPS);
        let down = f(&probe);
        set(&mut probe, i, base[i]);
        worst = worst.max(relative_error(g, (up - down) / (2.0 * FD_EPS)));
    }
    worst
}
