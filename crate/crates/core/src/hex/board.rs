//! Hex positions with incremental win detection.
//!
//! Black connects the north edge (row 0) to the south edge (row n-1); White
//! connects the west edge (column 0) to the east edge (column n-1). Cell
//! `(r, c)` touches `(r-1, c)`, `(r-1, c+1)`, `(r, c-1)`, `(r, c+1)`,
//! `(r+1, c-1)` and `(r+1, c)`.
//!
//! Connectivity is tracked with a union-find over the cells plus four
//! virtual edge nodes, so every move costs near-constant time.

use std::collections::VecDeque;
use std::fmt;

use super::HexError;

pub const MIN_SIZE: usize = 2;
pub const MAX_SIZE: usize = 13;
pub const MAX_CELLS: usize = MAX_SIZE * MAX_SIZE;

const WORDS: usize = MAX_CELLS.div_ceil(64);
const NORTH: usize = MAX_CELLS;
const SOUTH: usize = MAX_CELLS + 1;
const WEST: usize = MAX_CELLS + 2;
const EAST: usize = MAX_CELLS + 3;
const UF_LEN: usize = MAX_CELLS + 4;

const NEIGHBOUR_OFFSETS: [(isize, isize); 6] = [(-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Black,
    White,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Black => Player::White,
            Player::White => Player::Black,
        }
    }

    /// Game reward when this player wins: +1 for Black, -1 for White.
    pub fn reward(self) -> i8 {
        match self {
            Player::Black => 1,
            Player::White => -1,
        }
    }

    pub fn from_reward(reward: i8) -> Option<Player> {
        match reward {
            1 => Some(Player::Black),
            -1 => Some(Player::White),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Black => f.write_str("black"),
            Player::White => f.write_str("white"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    Black,
    White,
}

/// A cell index in `[0, n²)`, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(pub u16);

impl Action {
    pub fn from_coords(row: usize, col: usize, size: usize) -> Action {
        Action((row * size + col) as u16)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn coords(self, size: usize) -> (usize, usize) {
        (self.index() / size, self.index() % size)
    }
}

/// Hashable identity of a position: stone layout plus side to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PositionKey {
    size: u8,
    black: [u64; WORDS],
    white: [u64; WORDS],
    to_move: Player,
}

#[derive(Clone, Copy)]
pub struct GameState {
    size: u8,
    black: [u64; WORDS],
    white: [u64; WORDS],
    to_move: Player,
    winner: Option<Player>,
    move_count: u16,
    parent: [u8; UF_LEN],
}

impl GameState {
    pub fn new(size: usize) -> Result<GameState, HexError> {
        if !(MIN_SIZE..=MAX_SIZE).contains(&size) {
            return Err(HexError::BoardSize(size));
        }
        let mut parent = [0u8; UF_LEN];
        for (i, p) in parent.iter_mut().enumerate() {
            *p = i as u8;
        }
        Ok(GameState {
            size: size as u8,
            black: [0; WORDS],
            white: [0; WORDS],
            to_move: Player::Black,
            winner: None,
            move_count: 0,
            parent,
        })
    }

    /// A 1×1 board is outside the playable range but is a useful degenerate
    /// case: its single cell touches all four edges.
    pub fn new_unchecked(size: usize) -> GameState {
        assert!((1..=MAX_SIZE).contains(&size));
        let mut s = GameState::new(MIN_SIZE).expect("valid size");
        s.size = size as u8;
        s
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size as usize
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.size() * self.size()
    }

    #[inline]
    pub fn to_move(&self) -> Player {
        self.to_move
    }

    #[inline]
    pub fn winner(&self) -> Option<Player> {
        self.winner
    }

    #[inline]
    pub fn is_terminal(&self) -> bool {
        self.winner.is_some()
    }

    #[inline]
    pub fn move_count(&self) -> usize {
        self.move_count as usize
    }

    #[inline]
    pub fn cell(&self, index: usize) -> Cell {
        if bit(&self.black, index) {
            Cell::Black
        } else if bit(&self.white, index) {
            Cell::White
        } else {
            Cell::Empty
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        (0..self.cell_count()).map(|i| self.cell(i)).collect()
    }

    #[inline]
    pub fn is_empty_cell(&self, index: usize) -> bool {
        !bit(&self.black, index) && !bit(&self.white, index)
    }

    pub fn is_legal(&self, action: Action) -> bool {
        self.winner.is_none()
            && action.index() < self.cell_count()
            && self.is_empty_cell(action.index())
    }

    pub fn legal_moves(&self) -> Vec<Action> {
        if self.winner.is_some() {
            return Vec::new();
        }
        (0..self.cell_count())
            .filter(|&i| self.is_empty_cell(i))
            .map(|i| Action(i as u16))
            .collect()
    }

    /// Legal-action mask over all `n²` cells.
    pub fn legal_mask(&self) -> Vec<bool> {
        let open = self.winner.is_none();
        (0..self.cell_count())
            .map(|i| open && self.is_empty_cell(i))
            .collect()
    }

    pub fn stone_count(&self, player: Player) -> usize {
        let bits = match player {
            Player::Black => &self.black,
            Player::White => &self.white,
        };
        bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn key(&self) -> PositionKey {
        PositionKey {
            size: self.size,
            black: self.black,
            white: self.white,
            to_move: self.to_move,
        }
    }

    /// Returns the position after `action`; `self` is left untouched.
    pub fn apply_move(&self, action: Action) -> Result<GameState, HexError> {
        let mut next = *self;
        next.play(action)?;
        Ok(next)
    }

    /// In-place variant of [`GameState::apply_move`].
    pub fn play(&mut self, action: Action) -> Result<(), HexError> {
        if self.winner.is_some() {
            return Err(HexError::GameOver);
        }
        let idx = action.index();
        if idx >= self.cell_count() {
            return Err(HexError::OutOfRange(idx));
        }
        if !self.is_empty_cell(idx) {
            return Err(HexError::Occupied(idx));
        }
        let player = self.to_move;
        let n = self.size();
        let (row, col) = (idx / n, idx % n);
        match player {
            Player::Black => set_bit(&mut self.black, idx),
            Player::White => set_bit(&mut self.white, idx),
        }
        for (dr, dc) in NEIGHBOUR_OFFSETS {
            if let Some(nb) = neighbour(row, col, dr, dc, n) {
                if self.cell(nb) == self.cell(idx) {
                    self.union(idx, nb);
                }
            }
        }
        match player {
            Player::Black => {
                if row == 0 {
                    self.union(idx, NORTH);
                }
                if row == n - 1 {
                    self.union(idx, SOUTH);
                }
                if self.find(NORTH) == self.find(SOUTH) {
                    self.winner = Some(Player::Black);
                }
            }
            Player::White => {
                if col == 0 {
                    self.union(idx, WEST);
                }
                if col == n - 1 {
                    self.union(idx, EAST);
                }
                if self.find(WEST) == self.find(EAST) {
                    self.winner = Some(Player::White);
                }
            }
        }
        self.to_move = player.opponent();
        self.move_count += 1;
        Ok(())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        // Virtual edge nodes sit at the highest indices; keeping the larger
        // index as root keeps them at the top of their sets.
        if ra < rb {
            self.parent[ra] = rb as u8;
        } else if rb < ra {
            self.parent[rb] = ra as u8;
        }
    }

    /// From-scratch flood fill of both players' edge connections. This shares
    /// no state with the incremental union-find and serves as its oracle.
    pub fn scan_winner(&self) -> Option<Player> {
        let n = self.size();
        let black = flood_connects(n, |i| bit(&self.black, i), |r, _| r == 0, |r, _| r == n - 1);
        let white = flood_connects(n, |i| bit(&self.white, i), |_, c| c == 0, |_, c| c == n - 1);
        match (black, white) {
            (true, false) => Some(Player::Black),
            (false, true) => Some(Player::White),
            (false, false) => None,
            (true, true) => panic!("both players connected: corrupt position"),
        }
    }

    /// Board with colours swapped and rows/columns transposed. Maps Black's
    /// north-south goal onto White's west-east goal and vice versa.
    pub fn colour_swapped_transpose(&self) -> GameState {
        let n = self.size();
        let mut out = GameState::new_unchecked(n);
        for r in 0..n {
            for c in 0..n {
                let src = r * n + c;
                let dst = c * n + r;
                match self.cell(src) {
                    Cell::Black => set_bit(&mut out.white, dst),
                    Cell::White => set_bit(&mut out.black, dst),
                    Cell::Empty => {}
                }
            }
        }
        out.to_move = self.to_move.opponent();
        out.move_count = self.move_count;
        out.rebuild_connectivity();
        out
    }

    /// Builds a position from an explicit stone layout, bypassing turn order.
    /// Used by the solver and by tests constructing hypothetical boards.
    pub fn from_cells(size: usize, cells: &[Cell], to_move: Player) -> Result<GameState, HexError> {
        let mut s = GameState::new(size)?;
        if cells.len() != size * size {
            return Err(HexError::BoardSize(cells.len()));
        }
        for (i, c) in cells.iter().enumerate() {
            match c {
                Cell::Black => set_bit(&mut s.black, i),
                Cell::White => set_bit(&mut s.white, i),
                Cell::Empty => {}
            }
        }
        s.to_move = to_move;
        s.move_count = (s.stone_count(Player::Black) + s.stone_count(Player::White)) as u16;
        s.rebuild_connectivity();
        Ok(s)
    }

    fn rebuild_connectivity(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u8;
        }
        let n = self.size();
        for idx in 0..n * n {
            let cell = self.cell(idx);
            if cell == Cell::Empty {
                continue;
            }
            let (row, col) = (idx / n, idx % n);
            for (dr, dc) in NEIGHBOUR_OFFSETS {
                if let Some(nb) = neighbour(row, col, dr, dc, n) {
                    if self.cell(nb) == cell {
                        self.union(idx, nb);
                    }
                }
            }
            match cell {
                Cell::Black if row == 0 => self.union(idx, NORTH),
                Cell::White if col == 0 => self.union(idx, WEST),
                _ => {}
            }
            match cell {
                Cell::Black if row == n - 1 => self.union(idx, SOUTH),
                Cell::White if col == n - 1 => self.union(idx, EAST),
                _ => {}
            }
        }
        self.winner = if self.find(NORTH) == self.find(SOUTH) {
            Some(Player::Black)
        } else if self.find(WEST) == self.find(EAST) {
            Some(Player::White)
        } else {
            None
        };
    }
}

impl PartialEq for GameState {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.black == other.black
            && self.white == other.white
            && self.to_move == other.to_move
            && self.winner == other.winner
            && self.move_count == other.move_count
    }
}

impl Eq for GameState {}

impl fmt::Debug for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "GameState {{ size: {}, to_move: {}, winner: {:?}, moves: {} }}",
            self.size, self.to_move, self.winner, self.move_count
        )?;
        write!(f, "{}", self)
    }
}

/// Rhombus rendering: letters across the top, row numbers down the side,
/// each row shifted one half-cell further right.
impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size();
        write!(f, "   ")?;
        for c in 0..n {
            write!(f, " {}", (b'a' + c as u8) as char)?;
        }
        writeln!(f)?;
        for r in 0..n {
            write!(f, "{:>2} {}", r + 1, " ".repeat(r))?;
            for c in 0..n {
                let ch = match self.cell(r * n + c) {
                    Cell::Empty => '.',
                    Cell::Black => 'X',
                    Cell::White => 'O',
                };
                write!(f, " {}", ch)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[inline]
fn bit(bits: &[u64; WORDS], i: usize) -> bool {
    bits[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
fn set_bit(bits: &mut [u64; WORDS], i: usize) {
    bits[i >> 6] |= 1 << (i & 63);
}

#[inline]
fn neighbour(row: usize, col: usize, dr: isize, dc: isize, n: usize) -> Option<usize> {
    let r = row as isize + dr;
    let c = col as isize + dc;
    if r < 0 || c < 0 || r >= n as isize || c >= n as isize {
        None
    } else {
        Some(r as usize * n + c as usize)
    }
}

pub(crate) fn neighbours(index: usize, n: usize) -> impl Iterator<Item = usize> {
    let (row, col) = (index / n, index % n);
    NEIGHBOUR_OFFSETS
        .into_iter()
        .filter_map(move |(dr, dc)| neighbour(row, col, dr, dc, n))
}

fn flood_connects(
    n: usize,
    owned: impl Fn(usize) -> bool,
    start: impl Fn(usize, usize) -> bool,
    goal: impl Fn(usize, usize) -> bool,
) -> bool {
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::new();
    for (i, s) in seen.iter_mut().enumerate() {
        if owned(i) && start(i / n, i % n) {
            *s = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if goal(i / n, i % n) {
            return true;
        }
        for nb in neighbours(i, n) {
            if owned(nb) && !seen[nb] {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    false
}
