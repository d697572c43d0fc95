//! `hexpgs analyze` and `hexpgs solve`.

use std::path::PathBuf;

use clap::Args;
use hexpgs::arena::{AgentKind, AgentSpec, Solver, DEFAULT_NODE_BUDGET};
use hexpgs::hex::{parse_moves, to_notation, Action, GameState};
use hexpgs::search::{
    search_with, select_action, Algorithm, Evaluator, SearchConfig, SearchResult, SelectMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{load_net, CliError};
use crate::tournament::search_config;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, env = "HEXPGS_NET")]
    pub net: PathBuf,
    /// Moves from the empty board, e.g. "c3 b4 d2".
    #[arg(
        long,
        env = "HEXPGS_POSITION",
        default_value = "",
        allow_hyphen_values = true
    )]
    pub position: String,
    /// raw, mcs, mcts, pgs:ALPHA or pgs-uf:ALPHA.
    #[arg(long, env = "HEXPGS_ALGO", default_value = "mcts")]
    pub algo: String,
    #[arg(long, env = "HEXPGS_ITERS", default_value_t = 800)]
    pub iters: u32,
    #[arg(long, env = "HEXPGS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "HEXPGS_BATCH", default_value_t = 8)]
    pub batch: u32,
    /// Rows of the raw network policy to print.
    #[arg(long, env = "HEXPGS_TOP", default_value_t = 5)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, env = "HEXPGS_SIZE")]
    pub size: usize,
    #[arg(
        long,
        env = "HEXPGS_POSITION",
        default_value = "",
        allow_hyphen_values = true
    )]
    pub position: String,
    /// Node budget before giving up.
    #[arg(long, env = "HEXPGS_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
}

/// Searcher and configuration for an agent name; `None` for the raw network.
pub fn search_plan(spec: &AgentSpec, base: &SearchConfig) -> Option<(Algorithm, SearchConfig)> {
    let mut config = base.clone();
    let algorithm = match spec.kind {
        AgentKind::Raw => return None,
        AgentKind::Mcs => Algorithm::Mcs,
        AgentKind::Mcts => Algorithm::Mcts,
        AgentKind::Pgs { alpha } => {
            config.pgs_alpha = Some(alpha);
            Algorithm::Pgs
        }
        AgentKind::PgsFull { alpha } => {
            config.pgs_alpha = Some(alpha);
            config.pgs_full_network = true;
            Algorithm::Pgs
        }
    };
    Some((algorithm, config))
}

pub fn replay(position: &str, size: usize) -> Result<GameState, CliError> {
    let moves =
        parse_moves(position, size).map_err(|e| CliError::usage(format!("--position: {e}")))?;
    let mut state = GameState::new(size)?;
    for (ply, m) in moves.into_iter().enumerate() {
        state
            .play(m)
            .map_err(|e| CliError::usage(format!("--position move {}: {e}", ply + 1)))?;
    }
    Ok(state)
}

fn format_search(result: &SearchResult, size: usize) -> String {
    let mut rows: Vec<usize> = (0..result.visits.len())
        .filter(|&i| result.visits[i] > 0)
        .collect();
    rows.sort_by(|&a, &b| {
        result.visits[b]
            .cmp(&result.visits[a])
            .then(result.prior[b].total_cmp(&result.prior[a]))
            .then(a.cmp(&b))
    });
    let mut out = format!("{:<5} {:>7} {:>8} {:>7}\n", "move", "visits", "q", "prior");
    for i in rows {
        out.push_str(&format!(
            "{:<5} {:>7} {:>+8.4} {:>7.4}\n",
            to_notation(Action(i as u16), size),
            result.visits[i],
            result.q[i],
            result.prior[i]
        ));
    }
    out
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    let spec: AgentSpec = args.algo.parse().map_err(CliError::usage)?;
    let base = search_config(args.iters, args.batch)?;
    let net = load_net(&args.net)?;
    let size = net.config.size;
    let state = replay(&args.position, size)?;
    print!("{state}");
    if let Some(winner) = state.winner() {
        println!("game over: {winner} wins");
        return Ok(());
    }
    println!("{} to move", state.to_move());
    let mut eval = Evaluator::new(&net);
    let (actions, prior, value) = eval.evaluate(&state)?;
    let selected = match search_plan(&spec, &base) {
        None => eval.best_action(&state)?,
        Some((algorithm, config)) => {
            let config = config.with_seed(args.seed);
            let result = search_with(algorithm, &state, &mut eval, &config)?;
            println!(
                "{spec}, {} simulations, root value {:+.4}",
                result.total_visits(),
                result.root_value
            );
            print!("{}", format_search(&result, size));
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            select_action(&result, SelectMode::Greedy, &mut rng)
        }
    };
    println!("selected {}", to_notation(selected, size));
    println!("network value {value:+.4}");
    let mut ranked: Vec<(Action, f64)> = actions.into_iter().zip(prior).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    println!("network policy");
    for (a, p) in ranked.into_iter().take(args.top) {
        println!("{:<5} {p:.4}", to_notation(a, size));
    }
    Ok(())
}

pub fn run_solve(args: &SolveArgs) -> Result<(), CliError> {
    let state = replay(&args.position, args.size)?;
    print!("{state}");
    if let Some(winner) = state.winner() {
        println!("game over: {winner} wins");
        return Ok(());
    }
    let mut solver = Solver::new(args.budget);
    let value = solver.solve(&state)?;
    let wins = solver.winning_moves(&state)?;
    println!(
        "{} to move; {} wins with best play",
        state.to_move(),
        value.winner
    );
    let names: Vec<String> = wins.iter().map(|&a| to_notation(a, args.size)).collect();
    if names.is_empty() {
        println!("winning moves: none");
    } else {
        println!("winning moves: {}", names.join(" "));
    }
    println!("nodes {}", solver.nodes());
    Ok(())
}
