//! `hexpgs tournament` and `hexpgs scaling`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use hexpgs::arena::{
    estimate_elo_for, matches_to_csv, parse_agent_list, round_robin, scaling_experiment,
    scaling_rows, scaling_to_csv, Agent, AgentKind, AgentSpec, EloTable, MatchRecord, NetAgent,
    TournamentConfig,
};
use hexpgs::search::SearchConfig;
use hexpgs::Net;

use crate::error::{write_file, CliError};

#[derive(Debug, Args)]
pub struct TournamentArgs {
    /// Network files; agents pick one with an `@K` suffix (default 0).
    #[arg(long, env = "HEXPGS_NET", num_args = 1.., value_delimiter = ',', required = true)]
    pub net: Vec<PathBuf>,
    /// Comma-separated agents: raw, mcs, mcts, pgs:ALPHA, pgs-uf:ALPHA.
    #[arg(long, env = "HEXPGS_AGENTS")]
    pub agents: String,
    /// Board size; must match the networks. Defaults to theirs.
    #[arg(long, env = "HEXPGS_SIZE")]
    pub size: Option<usize>,
    /// Simulations per move for searching agents.
    #[arg(long, env = "HEXPGS_ITERS", default_value_t = 400)]
    pub iters: u32,
    #[arg(long, env = "HEXPGS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "HEXPGS_OUT")]
    pub out: PathBuf,
    /// Complete round robins to play.
    #[arg(long, env = "HEXPGS_ROUNDS", default_value_t = 1)]
    pub rounds: u32,
    #[arg(long, env = "HEXPGS_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Leaves evaluated per search batch.
    #[arg(long, env = "HEXPGS_BATCH", default_value_t = 8)]
    pub batch: u32,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, env = "HEXPGS_NET", num_args = 1.., value_delimiter = ',', required = true)]
    pub net: Vec<PathBuf>,
    /// Searching agents; the raw network is always added as the anchor.
    #[arg(long, env = "HEXPGS_AGENTS", default_value = "mcs,mcts,pgs:5e-4")]
    pub agents: String,
    /// Iteration counts, comma separated.
    #[arg(
        long,
        env = "HEXPGS_GRID",
        value_delimiter = ',',
        default_value = "50,100,200,400"
    )]
    pub grid: Vec<u32>,
    #[arg(long, env = "HEXPGS_SIZE")]
    pub size: Option<usize>,
    #[arg(long, env = "HEXPGS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "HEXPGS_OUT")]
    pub out: PathBuf,
    #[arg(long, env = "HEXPGS_ROUNDS", default_value_t = 1)]
    pub rounds: u32,
    #[arg(long, env = "HEXPGS_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[arg(long, env = "HEXPGS_BATCH", default_value_t = 8)]
    pub batch: u32,
}

/// Checks the agent list and search flags before anything is loaded.
fn validate(
    agents: &str,
    iters: u32,
    batch: u32,
    rounds: u32,
    workers: usize,
) -> Result<(Vec<AgentSpec>, SearchConfig), CliError> {
    let specs = parse_agent_list(agents).map_err(CliError::usage)?;
    if specs.len() < 2 {
        return Err(CliError::usage(format!(
            "need at least 2 agents, got {}",
            specs.len()
        )));
    }
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|t| t.to_string() == s.to_string()) {
            return Err(CliError::usage(format!("agent {s} listed twice")));
        }
    }
    if rounds == 0 || workers == 0 {
        return Err(CliError::usage("--rounds and --workers must be at least 1"));
    }
    let search = search_config(iters, batch)?;
    Ok((specs, search))
}

pub fn search_config(iters: u32, batch: u32) -> Result<SearchConfig, CliError> {
    let search = SearchConfig {
        batch_size: batch,
        ..SearchConfig::default()
    }
    .with_iterations(iters);
    search.validate().map_err(CliError::usage)?;
    Ok(search)
}

/// Loads every network and checks they share one board size.
pub fn load_nets(paths: &[PathBuf], size: Option<usize>) -> Result<(Vec<Net>, usize), CliError> {
    let mut nets = Vec::with_capacity(paths.len());
    let mut size = size;
    for path in paths {
        let net: Net = hexpgs::net::load(path, size).map_err(|e| CliError::file(path, e))?;
        size = Some(net.config.size);
        nets.push(net);
    }
    let size = size.ok_or_else(|| CliError::usage("no network given"))?;
    Ok((nets, size))
}

fn check_net_refs(specs: &[AgentSpec], nets: usize) -> Result<(), CliError> {
    match specs.iter().find(|s| s.net >= nets) {
        Some(s) => Err(CliError::usage(format!(
            "agent {s} refers to network #{} but {nets} given",
            s.net
        ))),
        None => Ok(()),
    }
}

fn create_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))
}

/// Text rendering of a rating table with per-agent results.
pub fn format_table(table: &EloTable, records: &[MatchRecord]) -> String {
    let width = table
        .entries
        .iter()
        .map(|e| e.agent.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>6}  {:>6}\n",
        "agent", "elo", "ci_low", "ci_high", "wins", "games"
    );
    for e in &table.entries {
        let games = records
            .iter()
            .filter(|r| r.agent_a == e.agent || r.agent_b == e.agent)
            .count();
        let wins = records.iter().filter(|r| r.winner == e.agent).count();
        out.push_str(&format!(
            "{:<width$}  {:>8.1}  {:>8.1}  {:>8.1}  {:>6}  {:>6}\n",
            e.agent, e.elo, e.ci_low, e.ci_high, wins, games
        ));
    }
    out
}

pub fn run(args: &TournamentArgs) -> Result<(), CliError> {
    let (specs, search) = validate(
        &args.agents,
        args.iters,
        args.batch,
        args.rounds,
        args.workers,
    )?;
    check_net_refs(&specs, args.net.len())?;
    let (nets, size) = load_nets(&args.net, args.size)?;
    create_out(&args.out)?;
    let agents = NetAgent::build_all(&specs, &nets, &search)?;
    let refs: Vec<&dyn Agent> = agents.iter().map(|a| a as &dyn Agent).collect();
    let config = TournamentConfig {
        rounds: args.rounds,
        workers: args.workers,
        ..TournamentConfig::new(size, args.seed)
    };
    let records = round_robin(&refs, &config)?;
    let ids: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
    let anchor = specs
        .iter()
        .find(|s| s.kind == AgentKind::Raw)
        .unwrap_or(&specs[0])
        .to_string();
    let table = estimate_elo_for(&ids, &records, &anchor)?;
    write_file(
        &args.out.join("matches.csv"),
        &matches_to_csv(&records, size),
    )?;
    write_file(&args.out.join("elo.csv"), &table.to_csv())?;
    println!(
        "{} games on {size}x{size}, {} iterations, anchor {anchor}",
        records.len(),
        args.iters
    );
    print!("{}", format_table(&table, &records));
    Ok(())
}

pub fn run_scaling(args: &ScalingArgs) -> Result<(), CliError> {
    let first = *args
        .grid
        .first()
        .ok_or_else(|| CliError::usage("empty --grid"))?;
    let searching: Vec<String> = parse_agent_list(&args.agents)
        .map_err(CliError::usage)?
        .into_iter()
        .filter(|s| s.kind != AgentKind::Raw)
        .map(|s| s.to_string())
        .collect();
    let list = format!("raw,{}", searching.join(","));
    let (specs, _) = validate(&list, first, args.batch, args.rounds, args.workers)?;
    check_net_refs(&specs, args.net.len())?;
    for &iters in &args.grid {
        search_config(iters, args.batch)?;
    }
    let (nets, size) = load_nets(&args.net, args.size)?;
    create_out(&args.out)?;
    let search = SearchConfig {
        batch_size: args.batch,
        ..SearchConfig::default()
    };
    let config = TournamentConfig {
        rounds: args.rounds,
        workers: args.workers,
        ..TournamentConfig::new(size, args.seed)
    };
    let points = scaling_experiment(&specs, &args.grid, &nets, &search, &config)?;
    for p in &points {
        write_file(
            &args.out.join(format!("matches-{:05}.csv", p.iterations)),
            &matches_to_csv(&p.records, size),
        )?;
        println!("{} iterations, {} games", p.iterations, p.records.len());
        print!("{}", format_table(&p.table, &p.records));
    }
    write_file(
        &args.out.join("scaling.csv"),
        &scaling_to_csv(&scaling_rows(&points)),
    )?;
    Ok(())
}
