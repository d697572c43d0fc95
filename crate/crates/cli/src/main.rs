//! `hexpgs`: training, tournaments, scaling runs, position analysis,
//! terminal play, exact solving and a self-check battery.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for runtime failures.
//! Every flag can also be set through a `HEXPGS_*` environment variable.

mod analyze;
mod error;
mod play;
mod selfcheck;
mod tournament;
mod train;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hexpgs",
    version,
    about = "Policy gradient search, MCS and MCTS for Hex"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run Expert Iteration and write a checkpoint per epoch.
    Train(train::TrainArgs),
    /// Round robin between agents; writes matches.csv and elo.csv.
    Tournament(tournament::TournamentArgs),
    /// Round robins over a grid of iteration counts; writes scaling.csv.
    Scaling(tournament::ScalingArgs),
    /// Search one position and print the root statistics.
    Analyze(analyze::AnalyzeArgs),
    /// Play against an agent in the terminal.
    Play(play::PlayArgs),
    /// Solve a small position exactly.
    Solve(analyze::SolveArgs),
    /// Run the fast invariant battery.
    Selfcheck(selfcheck::SelfcheckArgs),
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train(args) => train::run(&args),
        Command::Tournament(args) => tournament::run(&args),
        Command::Scaling(args) => tournament::run_scaling(&args),
        Command::Analyze(args) => analyze::run(&args),
        Command::Play(args) => play::run(&args, io::stdin().lock(), io::stdout().lock()),
        Command::Solve(args) => analyze::run_solve(&args),
        Command::Selfcheck(args) => selfcheck::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
