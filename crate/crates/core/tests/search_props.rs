//! Invariants of MCS, MCTS and PGS on random positions.

mod common;

use hexpgs::hex::{Action, GameState};
use hexpgs::net::NetConfig;
use hexpgs::search::{
    mcs_search, mcts_search, mix_noise, pgs_search, sample_dirichlet, search_with, Algorithm,
    Evaluator, Mcts, NoiseConfig, RootBandit, SearchConfig, SearchResult, Searcher,
};
use hexpgs::{derive_seed, Net};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_play;

fn small_net(size: usize, seed: u64) -> Net {
    let config = NetConfig {
        channels: 8,
        ..NetConfig::new(size)
    };
    Net::init(config, seed).unwrap()
}

fn position(size: usize, plies: usize, seed: u64) -> Option<GameState> {
    let s = random_play(size, plies, &mut ChaCha8Rng::seed_from_u64(seed));
    (!s.is_terminal()).then_some(s)
}

fn check_result(
    state: &GameState,
    result: &SearchResult,
    iterations: u32,
) -> Result<(), TestCaseError> {
    prop_assert_eq!(result.total_visits(), iterations);
    let total: f64 = result.policy.iter().sum();
    prop_assert!((total - 1.0).abs() < 1e-12);
    let prior_total: f64 = result.prior.iter().sum();
    prop_assert!((prior_total - 1.0).abs() < 1e-5);
    for i in 0..result.visits.len() {
        let legal = state.is_legal(Action(i as u16));
        if !legal {
            prop_assert_eq!(result.visits[i], 0);
            prop_assert_eq!(result.prior[i], 0.0);
        }
        prop_assert!(result.q[i].abs() <= 1.0 + 1e-12);
    }
    prop_assert!(result.root_value.abs() <= 1.0 + 1e-12);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pgs_at_zero_rate_is_mcs(
        size in 3usize..=5,
        plies in 0usize..12,
        seed in any::<u64>(),
        batch in 1u32..=8,
        iterations in 1u32..=48,
        vl in 0.0f64..3.0,
    ) {
        let Some(state) = position(size, plies, seed) else { return Ok(()) };
        let net = small_net(size, seed ^ 1);
        let config = SearchConfig {
            batch_size: batch,
            virtual_loss_weight: vl,
            ..SearchConfig::default()
        }
        .with_iterations(iterations)
        .with_seed(seed);
        let mcs = mcs_search(&state, &net, &config).unwrap();
        let pgs = pgs_search(&state, &net, &config.clone().with_alpha(0.0)).unwrap();
        prop_assert_eq!(mcs, pgs);
    }

    #[test]
    fn every_search_spends_its_budget_on_legal_moves(
        size in 3usize..=5,
        plies in 0usize..12,
        seed in any::<u64>(),
        batch in 1u32..=8,
        iterations in 1u32..=64,
    ) {
        let Some(state) = position(size, plies, seed) else { return Ok(()) };
        let net = small_net(size, seed ^ 2);
        let config = SearchConfig { batch_size: batch, ..SearchConfig::default() }
            .with_iterations(iterations)
            .with_seed(seed)
            .with_alpha(0.01);
        for algorithm in [Algorithm::Mcs, Algorithm::Mcts, Algorithm::Pgs] {
            let result = search_with(algorithm, &state, &mut Evaluator::new(&net), &config).unwrap();
            check_result(&state, &result, iterations)?;
        }
    }

    #[test]
    fn virtual_losses_clear_after_every_batch(
        plies in 0usize..10,
        seed in any::<u64>(),
        batch in 1usize..=8,
    ) {
        let Some(state) = position(4, plies, seed) else { return Ok(()) };
        let net = small_net(4, seed);
        let config = SearchConfig::default().with_iterations(40).with_seed(seed).with_alpha(0.01);
        let mut eval = Evaluator::new(&net);
        let mut mcts = Mcts::new(&mut eval, &state, &config).unwrap();
        for _ in 0..5 {
            mcts.run_batch(batch).unwrap();
            prop_assert_eq!(mcts.pending_virtual_losses(), 0);
        }
        prop_assert_eq!(mcts.completed() as usize, 5 * batch);
        let root = &mcts.nodes()[0];
        prop_assert_eq!(root.edges.iter().map(|e| e.n).sum::<u32>() as usize, 5 * batch);
        drop(mcts);
        let mut eval = Evaluator::new(&net);
        let mut pgs = RootBandit::pgs(&mut eval, &state, &config).unwrap();
        for _ in 0..5 {
            pgs.run_batch(batch).unwrap();
            prop_assert_eq!(pgs.pending_virtual_losses(), 0);
        }
        prop_assert_eq!(pgs.completed() as usize, 5 * batch);
        // A simulation that replays a known line to the end of the game adds
        // no new sequence.
        prop_assert!(pgs.trie().len() <= 5 * batch);
    }

    #[test]
    fn dirichlet_mixing_stays_on_the_simplex(len in 1usize..100, seed in any::<u64>(), mix in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta = sample_dirichlet(len, 0.12, &mut rng);
        prop_assert_eq!(eta.len(), len);
        prop_assert!((eta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(eta.iter().all(|&x| x >= 0.0));
        let prior = vec![1.0 / len as f64; len];
        let mixed = mix_noise(&prior, &eta, mix);
        for ((m, p), e) in mixed.iter().zip(&prior).zip(&eta) {
            prop_assert!((m - ((1.0 - mix) * p + mix * e)).abs() < 1e-12);
        }
    }

    #[test]
    fn derived_seeds_do_not_collide(base in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        prop_assume!(a != b);
        prop_assert_ne!(derive_seed(base, &[a]), derive_seed(base, &[b]));
        prop_assert_ne!(derive_seed(base, &[a, b]), derive_seed(base, &[b, a]));
        prop_assert_eq!(derive_seed(base, &[a, b]), derive_seed(base, &[a, b]));
    }
}

#[test]
fn searches_are_deterministic_under_a_seed() {
    let net = small_net(5, 3);
    let state = position(5, 4, 3).unwrap();
    let config = SearchConfig::default()
        .with_iterations(100)
        .with_seed(17)
        .with_alpha(0.01);
    let noisy = SearchConfig {
        dirichlet: Some(NoiseConfig::default()),
        ..config.clone()
    };
    for c in [&config, &noisy] {
        assert_eq!(
            mcts_search(&state, &net, c).unwrap(),
            mcts_search(&state, &net, c).unwrap()
        );
        assert_eq!(
            mcs_search(&state, &net, c).unwrap(),
            mcs_search(&state, &net, c).unwrap()
        );
        assert_eq!(
            pgs_search(&state, &net, c).unwrap(),
            pgs_search(&state, &net, c).unwrap()
        );
    }
    // Noise is drawn from the seed: a different seed moves the root prior.
    let a = mcts_search(&state, &net, &noisy).unwrap();
    let b = mcts_search(&state, &net, &noisy.clone().with_seed(18)).unwrap();
    assert_ne!(a.prior, b.prior);
}

#[test]
fn terminal_roots_and_missing_rates_are_rejected() {
    let net = small_net(3, 1);
    let mut s = GameState::new(3).unwrap();
    for a in [1, 0, 4, 3, 7] {
        s.play(Action(a)).unwrap();
    }
    assert!(s.is_terminal());
    let config = SearchConfig::default().with_iterations(8);
    assert!(mcts_search(&s, &net, &config).is_err());
    assert!(mcs_search(&s, &net, &config).is_err());
    let fresh = GameState::new(3).unwrap();
    assert!(pgs_search(&fresh, &net, &config).is_err());
    assert!(SearchConfig {
        iterations: 0,
        ..config.clone()
    }
    .validate()
    .is_err());
    assert!(SearchConfig {
        c_puct: -1.0,
        ..config
    }
    .validate()
    .is_err());
}

#[test]
fn config_text_round_trips() {
    let config = SearchConfig {
        dirichlet: Some(NoiseConfig {
            mix: 0.3,
            concentration: 0.2,
        }),
        pgs_full_network: true,
        ..SearchConfig::default()
    }
    .with_iterations(123)
    .with_seed(9)
    .with_alpha(5e-4);
    let back = SearchConfig::from_kv_text(&config.to_kv_text()).unwrap();
    assert_eq!(back, config);
    assert!(SearchConfig::from_kv_text("iterations = 10\nunknown = 1\n").is_err());
}
