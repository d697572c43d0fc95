//! Properties of the Hex engine against a flood-fill oracle.

mod common;

use hexpgs::hex::{
    canonical_index, canonical_mask, encode, from_notation, parse_moves, to_notation, Action, Cell,
    GameRecord, GameState, Player, PLANES,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{flood_connects, flood_winner, random_play};

fn other(p: Player) -> Player {
    match p {
        Player::Black => Player::White,
        Player::White => Player::Black,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn incremental_winner_matches_flood_fill(size in 2usize..=11, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<u16> = (0..(size * size) as u16).collect();
        order.shuffle(&mut rng);
        let mut s = GameState::new(size).unwrap();
        for a in order {
            let mover = s.to_move();
            s.play(Action(a)).unwrap();
            prop_assert_eq!(s.winner(), flood_winner(&s));
            if let Some(w) = s.winner() {
                // Only the player who just moved can have completed a chain.
                prop_assert_eq!(w, mover);
                prop_assert!(s.is_terminal());
                prop_assert!(s.legal_moves().is_empty());
                break;
            }
        }
        prop_assert!(s.winner().is_some(), "a full game always ends with a winner");
    }

    #[test]
    fn filled_boards_have_exactly_one_winner(size in 2usize..=11, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells: Vec<Cell> = (0..size * size)
            .map(|_| if rng.random::<bool>() { Cell::Black } else { Cell::White })
            .collect();
        let black = flood_connects(size, &cells, Cell::Black);
        let white = flood_connects(size, &cells, Cell::White);
        prop_assert!(black != white);
        let s = GameState::from_cells(size, &cells, Player::Black).unwrap();
        prop_assert_eq!(s.winner(), Some(if black { Player::Black } else { Player::White }));
    }

    #[test]
    fn colour_swap_transpose_is_a_symmetry(size in 2usize..=9, plies in 0usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_play(size, plies, &mut rng);
        let t = s.colour_swapped_transpose();
        prop_assert_eq!(t.to_move(), other(s.to_move()));
        prop_assert_eq!(t.winner(), s.winner().map(other));
        prop_assert_eq!(t.colour_swapped_transpose(), s);
        let n = size;
        for r in 0..n {
            for c in 0..n {
                let expect = match s.cell(r * n + c) {
                    Cell::Empty => Cell::Empty,
                    Cell::Black => Cell::White,
                    Cell::White => Cell::Black,
                };
                prop_assert_eq!(t.cell(c * n + r), expect);
            }
        }
        // Stones of the mover and of the opponent look identical from both
        // sides; only the side-to-move plane differs.
        let (a, b): (Vec<f32>, Vec<f32>) = (encode(&s), encode(&t));
        let cells = n * n;
        prop_assert_eq!(a.len(), PLANES * cells);
        prop_assert_eq!(&a[..2 * cells], &b[..2 * cells]);
        prop_assert_eq!(canonical_mask(&s), canonical_mask(&t));
        for i in 0..cells {
            prop_assert_eq!(a[2 * cells + i] + b[2 * cells + i], 1.0);
        }
    }

    #[test]
    fn canonical_index_is_an_involution(size in 2usize..=13, white in any::<bool>()) {
        let p = if white { Player::White } else { Player::Black };
        let mut seen = vec![false; size * size];
        for i in 0..size * size {
            let j = canonical_index(p, i, size);
            prop_assert_eq!(canonical_index(p, j, size), i);
            prop_assert!(!seen[j]);
            seen[j] = true;
            if !white {
                prop_assert_eq!(j, i);
            }
        }
    }

    #[test]
    fn encoding_marks_stones_in_the_movers_frame(size in 2usize..=9, plies in 0usize..30, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_play(size, plies, &mut rng);
        let x: Vec<f64> = encode(&s);
        let cells = size * size;
        let me = s.to_move();
        for i in 0..cells {
            let j = canonical_index(me, i, size);
            let (mine, theirs) = match (s.cell(i), me) {
                (Cell::Empty, _) => (0.0, 0.0),
                (Cell::Black, Player::Black) | (Cell::White, Player::White) => (1.0, 0.0),
                _ => (0.0, 1.0),
            };
            prop_assert_eq!(x[j], mine);
            prop_assert_eq!(x[cells + j], theirs);
            prop_assert_eq!(canonical_mask(&s)[j], s.is_legal(Action(i as u16)));
        }
    }

    #[test]
    fn records_round_trip_through_text(size in 2usize..=9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<u16> = (0..(size * size) as u16).collect();
        order.shuffle(&mut rng);
        let mut s = GameState::new(size).unwrap();
        let mut moves = Vec::new();
        for a in order {
            if s.is_terminal() {
                break;
            }
            s.play(Action(a)).unwrap();
            moves.push(Action(a));
        }
        let winner = s.winner().unwrap();
        let record = GameRecord::new(size, &moves, winner);
        let back = GameRecord::from_line(&record.to_line()).unwrap();
        prop_assert_eq!(&back, &record);
        prop_assert_eq!(back.replay().unwrap().winner(), Some(winner));
        let text: Vec<String> = moves.iter().map(|&a| to_notation(a, size)).collect();
        prop_assert_eq!(parse_moves(&text.join(" "), size).unwrap(), moves);
    }
}

#[test]
fn notation_covers_every_cell_once() {
    for size in 2..=13 {
        let mut names = std::collections::HashSet::new();
        for i in 0..size * size {
            let a = Action(i as u16);
            let name = to_notation(a, size);
            assert_eq!(from_notation(&name, size).unwrap(), a);
            assert_eq!(from_notation(&name.to_uppercase(), size).unwrap(), a);
            assert!(names.insert(name));
        }
    }
    for bad in ["", "a", "1", "a0", "k1", "a10", "1a", "aa1", "a 1", "-a1"] {
        assert!(from_notation(bad, 9).is_err(), "{bad:?}");
    }
}

#[test]
fn illegal_moves_leave_the_state_unchanged() {
    let mut s = GameState::new(3).unwrap();
    s.play(Action(4)).unwrap();
    let before = s;
    assert!(s.play(Action(4)).is_err());
    assert!(s.play(Action(9)).is_err());
    assert_eq!(s, before);
    // After b2, a1 b1 a2 b3 completes column b for Black.
    for a in [0, 1, 3, 7] {
        s.play(Action(a)).unwrap();
    }
    assert_eq!(s.winner(), Some(Player::Black));
    let done = s;
    assert!(s.play(Action(8)).is_err());
    assert_eq!(s, done);
}
