//! `hexpgs selfcheck`: fast invariant battery. Each item compares the library
//! against an independent oracle written here.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use hexpgs::arena::{elo_from_wins, head_to_head, schedule, solve, winning_moves, PRIOR_SIGMA};
use hexpgs::hex::{
    canonical_action, canonical_mask, encode, from_notation, to_notation, Action, Cell, GameState,
    Player,
};
use hexpgs::net::{
    loss, loss_and_gradient, reinforce_gradient, FlopCounter, NetConfig, Params, Sample,
    TrajectoryStep,
};
use hexpgs::search::{mcs_search, pgs_search, SearchConfig};
use hexpgs::{derive_seed, Net, NetF64};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{load_net, CliError};

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Weight file to verify as well.
    #[arg(long, env = "HEXPGS_NET")]
    pub net: Option<PathBuf>,
    #[arg(long, env = "HEXPGS_SEED", default_value_t = 0)]
    pub seed: u64,
}

type Check = Result<String, String>;
type Item<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

pub fn run(args: &SelfcheckArgs) -> Result<(), CliError> {
    let items: Vec<Item> = vec![
        ("winner-oracle", Box::new(move || winner_oracle(args.seed))),
        ("notation-roundtrip", Box::new(notation_roundtrip)),
        (
            "reinforce-gradient",
            Box::new(move || reinforce_fd(args.seed)),
        ),
        ("train-gradient", Box::new(move || train_fd(args.seed))),
        (
            "pgs-alpha0-equals-mcs",
            Box::new(move || pgs_zero_is_mcs(args.seed)),
        ),
        ("pairing-counts", Box::new(pairing_counts)),
        ("elo-375-273", Box::new(elo_gap)),
        ("solver", Box::new(solver_agrees)),
        ("weights-load", Box::new(|| weights_load(args.net.as_ref()))),
    ];
    let mut failed = 0;
    for (name, check) in &items {
        match check() {
            Ok(detail) => println!("PASS {name:<22} {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name:<22} {detail}");
            }
        }
    }
    println!("{} of {} checks passed", items.len() - failed, items.len());
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} check(s) failed")));
    }
    Ok(())
}

/// Depth-first search over `colour` stones from one edge to the opposite
/// one: top to bottom when `along_rows`, else left to right.
fn connects(n: usize, at: impl Fn(usize) -> Cell, colour: Cell, along_rows: bool) -> bool {
    let n = n as isize;
    let mut seen = vec![false; (n * n) as usize];
    let mut stack = Vec::new();
    for k in 0..n {
        let (r, c) = if along_rows { (0, k) } else { (k, 0) };
        if at((r * n + c) as usize) == colour {
            seen[(r * n + c) as usize] = true;
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
            if at(i) == colour && !seen[i] {
                seen[i] = true;
                stack.push((nr, nc));
            }
        }
    }
    false
}

fn flood_winner(state: &GameState) -> Option<Player> {
    let at = |i| state.cell(i);
    if connects(state.size(), at, Cell::Black, true) {
        Some(Player::Black)
    } else if connects(state.size(), at, Cell::White, false) {
        Some(Player::White)
    } else {
        None
    }
}

fn winner_oracle(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    let mut states = 0;
    for size in [3, 5, 7, 9] {
        for _ in 0..200 {
            let mut s = GameState::new(size).map_err(|e| e.to_string())?;
            while let Some(&a) = s.legal_moves().choose(&mut rng) {
                s.play(a).map_err(|e| e.to_string())?;
                states += 1;
                if s.winner() != flood_winner(&s) {
                    return Err(format!(
                        "size {size}: engine says {:?}, flood fill {:?}",
                        s.winner(),
                        flood_winner(&s)
                    ));
                }
            }
            // Fill the rest of the board at random: exactly one side connects.
            let cells: Vec<Cell> = (0..size * size)
                .map(|i| match s.cell(i) {
                    Cell::Empty if rng.random::<bool>() => Cell::Black,
                    Cell::Empty => Cell::White,
                    c => c,
                })
                .collect();
            let black = connects(size, |i| cells[i], Cell::Black, true);
            let white = connects(size, |i| cells[i], Cell::White, false);
            if black == white {
                return Err(format!(
                    "size {size}: filled board with black={black} white={white}"
                ));
            }
        }
    }
    Ok(format!("{states} states on sizes 3, 5, 7, 9"))
}

fn notation_roundtrip() -> Check {
    for size in [3, 9, 13] {
        for i in 0..size * size {
            let a = Action(i as u16);
            let text = to_notation(a, size);
            if from_notation(&text, size).ok() != Some(a) {
                return Err(format!("{text} on {size}x{size}"));
            }
        }
    }
    for bad in ["", "a0", "z1", "a10", "1a", "b", "a-1"] {
        if from_notation(bad, 9).is_ok() {
            return Err(format!("accepted {bad:?}"));
        }
    }
    Ok("all cells on 3, 9, 13; malformed tokens rejected".into())
}

fn mini_net(seed: u64) -> Result<NetF64, String> {
    let config = NetConfig {
        size: 3,
        channels: 4,
        trunk_layers: 2,
        value_hidden: 8,
    };
    NetF64::init(config, seed).map_err(|e| e.to_string())
}

fn random_positions(size: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<GameState> {
    let mut out = Vec::new();
    while out.len() < count {
        let mut s = GameState::new(size).expect("valid size");
        let plies = rng.random_range(0..size * size);
        for _ in 0..plies {
            match s.legal_moves().choose(rng) {
                Some(&a) => s.play(a).expect("legal"),
                None => break,
            }
        }
        if !s.is_terminal() {
            out.push(s);
        }
    }
    out
}

/// Sets the `index`-th scalar of the flattened parameters.
fn set<P: Params<f64>>(p: &mut P, mut index: usize, value: f64) {
    for s in p.slices_mut() {
        if index < s.len() {
            s[index] = value;
            return;
        }
        index -= s.len();
    }
    panic!("parameter index out of range");
}

/// Largest relative error between `analytic` and central differences of `f`.
fn max_fd_error<P: Params<f64> + Clone>(at: &P, analytic: &P, f: impl Fn(&P) -> f64) -> f64 {
    const EPS: f64 = 1e-5;
    let grad = analytic.flat();
    let base = at.flat();
    let mut worst: f64 = 0.0;
    let mut probe = at.clone();
    for (i, &g) in grad.iter().enumerate() {
        set(&mut probe, i, base[i] + EPS);
        let up = f(&probe);
        set(&mut probe, i, base[i] - EPS);
        let down = f(&probe);
        set(&mut probe, i, base[i]);
        let numeric = (up - down) / (2.0 * EPS);
        let scale = g.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((g - numeric).abs() / scale);
    }
    worst
}

fn reinforce_fd(seed: u64) -> Check {
    let net = mini_net(derive_seed(seed, &[3]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[4]));
    let mut trajectory = Vec::new();
    for s in random_positions(3, 4, &mut rng) {
        let mask = canonical_mask(&s);
        let a = *s.legal_moves().choose(&mut rng).expect("non-terminal");
        trajectory.push(TrajectoryStep {
            features: Arc::new(net.trunk_forward(&encode(&s))),
            action: canonical_action(&s, a),
            mask,
        });
    }
    let (leaf, baseline) = (0.7, 0.1);
    let objective = |head: &hexpgs::net::PolicyHead<f64>| -> f64 {
        trajectory
            .iter()
            .enumerate()
            .map(|(i, step)| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let p = hexpgs::net::policy_head_forward(&step.features, head, &step.mask)
                    .expect("legal mask");
                (sign * leaf - baseline) * p[step.action].ln()
            })
            .sum()
    };
    let grad = reinforce_gradient(
        &net.policy,
        &trajectory,
        leaf,
        baseline,
        &mut FlopCounter::default(),
    )
    .map_err(|e| e.to_string())?;
    let err = max_fd_error(&net.policy, &grad, objective);
    if err < 1e-4 {
        Ok(format!(
            "max relative error {err:.2e} over {} parameters",
            grad.num_params()
        ))
    } else {
        Err(format!("max relative error {err:.2e}"))
    }
}

fn train_fd(seed: u64) -> Check {
    let net = mini_net(derive_seed(seed, &[5]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[6]));
    let batch: Vec<Sample<f64>> = random_positions(3, 6, &mut rng)
        .iter()
        .map(|s| {
            let legal = canonical_mask(s);
            let raw: Vec<f64> = legal
                .iter()
                .map(|&m| if m { rng.random::<f64>() + 0.1 } else { 0.0 })
                .collect();
            let total: f64 = raw.iter().sum();
            Sample {
                input: encode(s),
                legal,
                target: raw.iter().map(|v| v / total).collect(),
                outcome: if rng.random::<bool>() { 1.0 } else { -1.0 },
            }
        })
        .collect();
    let l2 = 1e-3;
    let (_, grad) = loss_and_gradient(&net, &batch, l2).map_err(|e| e.to_string())?;
    let err = max_fd_error(&net, &grad, |p| {
        loss(p, &batch, l2).expect("finite loss").total()
    });
    if err < 1e-4 {
        Ok(format!(
            "max relative error {err:.2e} over {} parameters",
            grad.num_params()
        ))
    } else {
        Err(format!("max relative error {err:.2e}"))
    }
}

fn pgs_zero_is_mcs(seed: u64) -> Check {
    let net = Net::init(NetConfig::new(5), derive_seed(seed, &[7])).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[8]));
    let positions = random_positions(5, 5, &mut rng);
    for (i, s) in positions.iter().enumerate() {
        let config = SearchConfig::default()
            .with_iterations(64)
            .with_seed(derive_seed(seed, &[9, i as u64]));
        let mcs = mcs_search(s, &net, &config).map_err(|e| e.to_string())?;
        let pgs =
            pgs_search(s, &net, &config.clone().with_alpha(0.0)).map_err(|e| e.to_string())?;
        if mcs != pgs {
            return Err(format!("position {i} differs"));
        }
    }
    Ok(format!("{} positions identical", positions.len()))
}

fn pairing_counts() -> Check {
    let fixtures = schedule(2, 9, 1);
    if fixtures.len() != 162 {
        return Err(format!("{} games on 9x9, expected 162", fixtures.len()));
    }
    for cell in 0..81u16 {
        let colours: Vec<bool> = fixtures
            .iter()
            .filter(|f| f.opening == Action(cell))
            .map(|f| f.a_black)
            .collect();
        if colours.len() != 2 || colours[0] == colours[1] {
            return Err(format!(
                "opening {} scheduled {colours:?}",
                to_notation(Action(cell), 9)
            ));
        }
    }
    Ok("162 games, every opening once per colour".into())
}

fn elo_gap() -> Check {
    let (agents, wins) = head_to_head(375, 273);
    let table =
        elo_from_wins(&agents, &wins, &agents[1], PRIOR_SIGMA).map_err(|e| e.to_string())?;
    let (gap, _) = table.gap(&agents[0], &agents[1]).ok_or("missing agents")?;
    if (gap - 55.0).abs() <= 3.0 {
        Ok(format!("gap {gap:.1}"))
    } else {
        Err(format!("gap {gap:.1}, expected 55 +/- 3"))
    }
}

/// Plain minimax without pruning or tables: does the player to move win?
fn brute_force_wins(state: &GameState) -> bool {
    state.legal_moves().into_iter().any(|a| {
        let next = state.apply_move(a).expect("legal");
        next.winner().is_some() || !brute_force_wins(&next)
    })
}

fn solver_agrees() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let positions = random_positions(3, 40, &mut rng);
    for s in &positions {
        let expect = brute_force_wins(s);
        let got = solve(s).map_err(|e| e.to_string())?.winner == s.to_move();
        if got != expect {
            return Err(format!("disagrees on\n{s}"));
        }
        let moves = winning_moves(s).map_err(|e| e.to_string())?;
        if moves.is_empty() == expect {
            return Err(format!("winning-move list inconsistent on\n{s}"));
        }
    }
    for size in 2..=3 {
        let s = GameState::new(size).map_err(|e| e.to_string())?;
        if solve(&s).map_err(|e| e.to_string())?.winner != Player::Black {
            return Err(format!("empty {size}x{size} is not a first-player win"));
        }
    }
    Ok(format!("{} positions match minimax", positions.len()))
}

fn weights_load(path: Option<&PathBuf>) -> Check {
    match path {
        Some(p) => {
            let net = load_net(p).map_err(|e| e.to_string())?;
            if !net.all_finite() {
                return Err(format!("{}: non-finite weights", p.display()));
            }
            Ok(format!(
                "{} ({}x{}, {} parameters)",
                p.display(),
                net.config.size,
                net.config.size,
                net.num_params()
            ))
        }
        None => {
            let net = Net::init(NetConfig::new(5), 1).map_err(|e| e.to_string())?;
            let bytes = hexpgs::net::io::to_bytes(&net);
            let back: Net =
                hexpgs::net::io::from_bytes(&bytes, Some(5)).map_err(|e| e.to_string())?;
            if back != net {
                return Err("round trip changed the weights".into());
            }
            let mut corrupt = bytes.clone();
            let mid = corrupt.len() / 2;
            corrupt[mid] ^= 0x40;
            if hexpgs::net::io::from_bytes::<f32>(&corrupt, Some(5)).is_ok() {
                return Err("corrupted bytes were accepted".into());
            }
            Ok("in-memory round trip; corruption detected".into())
        }
    }
}
