//! `hexpgs train`: Expert Iteration driven by a TOML config.

use std::path::PathBuf;

use clap::Args;
use hexpgs::exit::{EpochSummary, ExitConfig, ExitRun};

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML run configuration.
    #[arg(long, env = "HEXPGS_CONFIG")]
    pub config: PathBuf,
    /// Directory for checkpoints, manifests and game records.
    #[arg(long, env = "HEXPGS_OUT")]
    pub out: PathBuf,
    /// Checkpoint (weights or manifest) to continue from.
    #[arg(long, env = "HEXPGS_RESUME")]
    pub resume: Option<PathBuf>,
}

pub fn summary_line(s: &EpochSummary) -> String {
    format!(
        "epoch {} games {} buffer {} policy_loss {:.5} value_loss {:.5} resign_threshold {:.4}",
        s.epoch, s.games, s.buffer_size, s.policy_loss, s.value_loss, s.resign_threshold
    )
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| CliError::file(&args.config, e))?;
    let config = ExitConfig::from_kv_text(&text).map_err(|e| CliError::file(&args.config, e))?;
    if let Some(checkpoint) = &args.resume {
        if !checkpoint.exists() {
            return Err(CliError::file(checkpoint, "no such checkpoint"));
        }
    }
    let mut run = match &args.resume {
        Some(checkpoint) => ExitRun::resume(config, &args.out, checkpoint)?,
        None => ExitRun::start(config, &args.out)?,
    };
    if run.epoch() >= run.config().epochs {
        println!("checkpoint is at epoch {}; nothing to do", run.epoch());
        return Ok(());
    }
    run.run(|s| println!("{}", summary_line(s)))?;
    Ok(())
}
