//! `hexpgs play`: a human against an agent in the terminal.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hexpgs::arena::{Agent, AgentSpec, NetAgent};
use hexpgs::derive_seed;
use hexpgs::hex::{from_notation, to_notation, GameState, Player};

use crate::error::{load_net, CliError};
use crate::tournament::search_config;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Colour {
    Black,
    White,
}

impl From<Colour> for Player {
    fn from(c: Colour) -> Player {
        match c {
            Colour::Black => Player::Black,
            Colour::White => Player::White,
        }
    }
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long, env = "HEXPGS_NET")]
    pub net: PathBuf,
    /// Opponent: raw, mcs, mcts, pgs:ALPHA or pgs-uf:ALPHA.
    #[arg(long, env = "HEXPGS_ALGO", default_value = "mcts")]
    pub algo: String,
    #[arg(long, env = "HEXPGS_ITERS", default_value_t = 400)]
    pub iters: u32,
    /// Colour the human plays; Black moves first.
    #[arg(long, env = "HEXPGS_HUMAN_COLOUR", value_enum, default_value_t = Colour::Black)]
    pub human_colour: Colour,
    #[arg(long, env = "HEXPGS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "HEXPGS_BATCH", default_value_t = 8)]
    pub batch: u32,
}

pub fn run(args: &PlayArgs, input: impl BufRead, output: impl Write) -> Result<(), CliError> {
    let spec: AgentSpec = args.algo.parse().map_err(CliError::usage)?;
    let search = search_config(args.iters, args.batch)?;
    let net = load_net(&args.net)?;
    let agent = NetAgent::new(spec, &net, search)?;
    play_game(
        &agent,
        net.config.size,
        args.human_colour.into(),
        args.seed,
        input,
        output,
    )
}

/// Runs one game. Returns when it ends, on `quit` or at end of input.
pub fn play_game(
    agent: &dyn Agent,
    size: usize,
    human: Player,
    seed: u64,
    mut input: impl BufRead,
    mut out: impl Write,
) -> Result<(), CliError> {
    let mut session = agent.session();
    let mut state = GameState::new(size)?;
    writeln!(
        out,
        "you play {human} ({}), {} plays {}",
        edges(human),
        agent.id(),
        human.opponent()
    )?;
    writeln!(
        out,
        "enter moves like {}; 'quit' leaves",
        to_notation(hexpgs::hex::Action(0), size)
    )?;
    let mut ply = 0u64;
    let mut line = String::new();
    write!(out, "{state}")?;
    while !state.is_terminal() {
        if state.to_move() == human {
            write!(out, "{human} to move> ")?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                writeln!(out, "end of input, leaving")?;
                return Ok(());
            }
            let token = line.trim();
            if token.is_empty() {
                continue;
            }
            if token.eq_ignore_ascii_case("quit") {
                writeln!(out, "leaving")?;
                return Ok(());
            }
            let action = match from_notation(token, size) {
                Ok(a) if state.is_legal(a) => a,
                Ok(_) => {
                    writeln!(out, "{token} is occupied")?;
                    continue;
                }
                Err(e) => {
                    writeln!(out, "{e}")?;
                    continue;
                }
            };
            state.play(action)?;
        } else {
            let action = session.choose(&state, derive_seed(seed, &[ply]))?;
            writeln!(out, "{} plays {}", agent.id(), to_notation(action, size))?;
            state.play(action)?;
        }
        ply += 1;
        write!(out, "{state}")?;
    }
    let winner = state.winner().expect("terminal state has a winner");
    let who = if winner == human {
        "you win"
    } else {
        "you lose"
    };
    writeln!(out, "{winner} wins, {who}")?;
    Ok(())
}

fn edges(p: Player) -> &'static str {
    match p {
        Player::Black => "connect top and bottom",
        Player::White => "connect left and right",
    }
}
