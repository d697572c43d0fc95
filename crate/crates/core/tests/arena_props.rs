//! Tournament scheduling, Elo estimation and the exact solver.

mod common;

use hexpgs::arena::{
    elo_from_wins, estimate_elo, head_to_head, matches_to_csv, round_robin, schedule, solve,
    winning_moves, Agent, FirstLegal, MatchRecord, TournamentConfig, UniformRandom, PRIOR_SIGMA,
};
use hexpgs::hex::{Action, GameState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_mover_wins, random_play};

const K: f64 = std::f64::consts::LN_10 / 400.0;

/// Posterior-mode gap for two players under independent N(0, sigma^2)
/// priors. The mode sits at `(d/2, -d/2)`, so only the stationarity
/// condition in `d` needs solving; it is monotone, so bisection finds it.
fn two_player_gap(wins: u64, losses: u64, sigma: f64) -> f64 {
    let logistic = |x: f64| 1.0 / (1.0 + (-x).exp());
    let slope = |d: f64| {
        K * (wins as f64 - (wins + losses) as f64 * logistic(K * d)) - d / (2.0 * sigma * sigma)
    };
    let (mut lo, mut hi) = (-4000.0, 4000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_pair_plays_each_opening_once_per_colour(agents in 2usize..6, size in 2usize..=9, rounds in 1u32..3) {
        let fixtures = schedule(agents, size, rounds);
        let pairs = agents * (agents - 1) / 2;
        prop_assert_eq!(fixtures.len(), pairs * 2 * size * size * rounds as usize);
        for round in 0..rounds {
            for a in 0..agents {
                for b in a + 1..agents {
                    for cell in 0..(size * size) as u16 {
                        let games: Vec<bool> = fixtures
                            .iter()
                            .filter(|f| f.round == round && f.a == a && f.b == b && f.opening == Action(cell))
                            .map(|f| f.a_black)
                            .collect();
                        prop_assert_eq!(games.len(), 2);
                        prop_assert!(games[0] != games[1]);
                    }
                }
            }
        }
    }

    #[test]
    fn head_to_head_gap_matches_the_one_dimensional_mode(wins in 0u64..400, losses in 0u64..400) {
        prop_assume!(wins + losses > 0);
        let (agents, matrix) = head_to_head(wins, losses);
        let table = elo_from_wins(&agents, &matrix, &agents[1], PRIOR_SIGMA).unwrap();
        let (gap, se) = table.gap(&agents[0], &agents[1]).unwrap();
        prop_assert!((gap - two_player_gap(wins, losses, PRIOR_SIGMA)).abs() < 1e-6, "{gap}");
        prop_assert!(se > 0.0 && se.is_finite());
        prop_assert_eq!(table.get(&agents[1]).unwrap().elo, 0.0);
        // Swapping the result flips the sign.
        let (_, flipped) = head_to_head(losses, wins);
        let mirror = elo_from_wins(&agents, &flipped, &agents[1], PRIOR_SIGMA).unwrap();
        prop_assert!((mirror.gap(&agents[0], &agents[1]).unwrap().0 + gap).abs() < 1e-6);
    }

    #[test]
    fn more_wins_never_lower_a_rating(wins in 0u64..200, losses in 1u64..200) {
        let (agents, before) = head_to_head(wins, losses);
        let (_, after) = head_to_head(wins + 1, losses);
        let a = elo_from_wins(&agents, &before, &agents[1], PRIOR_SIGMA).unwrap();
        let b = elo_from_wins(&agents, &after, &agents[1], PRIOR_SIGMA).unwrap();
        prop_assert!(b.gap(&agents[0], &agents[1]).unwrap().0 > a.gap(&agents[0], &agents[1]).unwrap().0);
    }

    #[test]
    fn solver_agrees_with_plain_minimax(size in 2usize..=4, plies in 0usize..16, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_play(size, plies, &mut rng);
        // Keep plain minimax affordable on 4x4.
        prop_assume!(!s.is_terminal() && s.legal_moves().len() <= 10);
        let mover_wins = brute_force_mover_wins(&s);
        let value = solve(&s).unwrap();
        prop_assert_eq!(value.winner == s.to_move(), mover_wins);
        let winning = winning_moves(&s).unwrap();
        prop_assert_eq!(!winning.is_empty(), mover_wins);
        for a in s.legal_moves() {
            let next = s.apply_move(a).unwrap();
            let wins_here = next.winner().is_some() || !brute_force_mover_wins(&next);
            prop_assert_eq!(winning.contains(&a), wins_here);
        }
    }
}

#[test]
fn round_robin_is_deterministic_and_worker_invariant() {
    let a = UniformRandom("random-a".into());
    let b = UniformRandom("random-b".into());
    let c = FirstLegal("first".into());
    let agents: Vec<&dyn Agent> = vec![&a, &b, &c];
    let config = TournamentConfig::new(4, 77);
    let one = round_robin(&agents, &config).unwrap();
    let again = round_robin(&agents, &config).unwrap();
    let parallel = round_robin(
        &agents,
        &TournamentConfig {
            workers: 3,
            ..config.clone()
        },
    )
    .unwrap();
    assert_eq!(one.len(), 3 * 2 * 16);
    assert_eq!(one, again);
    assert_eq!(one, parallel);
    assert_eq!(matches_to_csv(&one, 4), matches_to_csv(&parallel, 4));
    let reseeded = round_robin(&agents, &TournamentConfig::new(4, 78)).unwrap();
    assert_ne!(one, reseeded);
    for r in &one {
        assert!(r.winner == r.agent_a || r.winner == r.agent_b);
        assert!(r.black_agent == r.agent_a || r.black_agent == r.agent_b);
    }
}

#[test]
fn forced_openings_are_played() {
    // Two deterministic agents: game outcomes depend only on the opening and
    // colours, so the same fixture always yields the same winner.
    let a = FirstLegal("a".into());
    let b = FirstLegal("b".into());
    let agents: Vec<&dyn Agent> = vec![&a, &b];
    let records = round_robin(&agents, &TournamentConfig::new(3, 1)).unwrap();
    let table = estimate_elo(&records, "a").unwrap();
    assert_eq!(table.get("a").unwrap().elo, 0.0);
    // Colour-swapped pairs of identical agents give each side the same
    // number of wins.
    let a_wins = records.iter().filter(|r| r.winner == "a").count();
    assert_eq!(a_wins * 2, records.len());
    let by_opening = |cell: u16| -> Vec<&MatchRecord> {
        records
            .iter()
            .filter(|r| r.opening == Action(cell))
            .collect()
    };
    for cell in 0..9 {
        let pair = by_opening(cell);
        assert_eq!(pair.len(), 2);
        assert_ne!(pair[0].winner, pair[1].winner);
    }
}

#[test]
fn elo_rejects_bad_input() {
    let (agents, wins) = head_to_head(3, 2);
    assert!(elo_from_wins(&agents, &wins, "nobody", PRIOR_SIGMA).is_err());
    let idle = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let matrix = vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]];
    assert!(elo_from_wins(&idle, &matrix, "a", PRIOR_SIGMA).is_err());
    let a = FirstLegal("same".into());
    let b = FirstLegal("same".into());
    assert!(round_robin(&[&a as &dyn Agent, &b], &TournamentConfig::new(3, 0)).is_err());
    assert!(round_robin(&[&a as &dyn Agent], &TournamentConfig::new(3, 0)).is_err());
}

#[test]
fn empty_small_boards_are_first_player_wins() {
    for size in 2..=4 {
        let s = GameState::new(size).unwrap();
        assert_eq!(solve(&s).unwrap().winner, s.to_move());
    }
}
