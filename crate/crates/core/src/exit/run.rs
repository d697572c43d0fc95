//! The epoch loop: generate games, refill the buffer, recalibrate the
//! resignation threshold, train, checkpoint.

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hex::{read_records, GameRecord};
use crate::net::{load, save, train_step, Params, PolicyValueNet, SgdMomentum};
use crate::{derive_seed, Net};

use super::buffer::{training_examples, ReplayBuffer};
use super::config::ExitConfig;
use super::resign::{calibrate_resign_threshold, false_positive_rate};
use super::selfplay::self_play_game;
use super::ExitError;

const INIT_TAG: u64 = 0x1417;
const TRAIN_TAG: u64 = u64::MAX;

/// Per-epoch manifest written next to each checkpoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpochSummary {
    pub epoch: u32,
    pub games_played: u64,
    pub buffer_size: usize,
    /// Threshold after this epoch's recalibration.
    pub resign_threshold: f64,
    /// Threshold used while this epoch's games were played.
    pub threshold_in_force: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub games: u32,
    pub resigned_games: u32,
    pub mean_game_length: f64,
    /// This epoch's no-resign games, scored against `threshold_in_force`.
    pub held_out_games: u32,
    pub held_out_false_positives: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub epoch: u32,
    pub weights: PathBuf,
    pub manifest: PathBuf,
}

pub fn checkpoint_paths(dir: &Path, epoch: u32) -> Checkpoint {
    Checkpoint {
        epoch,
        weights: dir.join(format!("epoch-{epoch:04}.pvn")),
        manifest: dir.join(format!("epoch-{epoch:04}.toml")),
    }
}

fn momentum_path(dir: &Path, epoch: u32) -> PathBuf {
    dir.join(format!("epoch-{epoch:04}.momentum.pvn"))
}

fn games_path(dir: &Path, epoch: u32) -> PathBuf {
    dir.join(format!("games-{epoch:04}.jsonl"))
}

pub fn read_manifest(path: &Path) -> Result<EpochSummary, ExitError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ExitError::Checkpoint(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ExitError::Checkpoint(format!("{}: {e}", path.display())))
}

/// Checkpoints present in `dir`, ordered by epoch.
pub fn list_checkpoints(dir: &Path) -> Result<Vec<Checkpoint>, ExitError> {
    let mut epochs = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(e) = name
            .strip_prefix("epoch-")
            .and_then(|r| r.strip_suffix(".toml"))
        {
            if let Ok(e) = e.parse::<u32>() {
                epochs.push(e);
            }
        }
    }
    epochs.sort_unstable();
    Ok(epochs
        .into_iter()
        .map(|e| checkpoint_paths(dir, e))
        .collect())
}

/// State of an Expert Iteration run between epochs.
pub struct ExitRun {
    config: ExitConfig,
    out_dir: PathBuf,
    net: Net,
    optimizer: SgdMomentum<f32>,
    buffer: ReplayBuffer,
    calibration: VecDeque<GameRecord>,
    threshold: f64,
    epoch: u32,
    games_played: u64,
}

impl ExitRun {
    /// Starts a fresh run and writes the epoch-0 checkpoint.
    pub fn start(config: ExitConfig, out_dir: impl Into<PathBuf>) -> Result<ExitRun, ExitError> {
        config.validate()?;
        let out_dir = out_dir.into();
        fs::create_dir_all(&out_dir)?;
        fs::write(out_dir.join("config.toml"), config.to_kv_text())?;
        let net = PolicyValueNet::init(config.net_config(), derive_seed(config.seed, &[INIT_TAG]))?;
        let run = ExitRun {
            optimizer: SgdMomentum::new(&net),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            calibration: VecDeque::new(),
            threshold: config.resign.threshold,
            epoch: 0,
            games_played: 0,
            net,
            out_dir,
            config,
        };
        run.save_checkpoint(&EpochSummary {
            resign_threshold: run.threshold,
            threshold_in_force: run.threshold,
            ..EpochSummary::default()
        })?;
        Ok(run)
    }

    /// Continues from a checkpoint (its weights or manifest path). Game
    /// records of earlier epochs are read from the checkpoint's directory to
    /// rebuild the replay buffer and calibration window.
    pub fn resume(
        config: ExitConfig,
        out_dir: impl Into<PathBuf>,
        checkpoint: &Path,
    ) -> Result<ExitRun, ExitError> {
        config.validate()?;
        let out_dir = out_dir.into();
        fs::create_dir_all(&out_dir)?;
        let manifest_path = checkpoint.with_extension("toml");
        let manifest = read_manifest(&manifest_path)?;
        let src = checkpoint.parent().unwrap_or(Path::new(".")).to_path_buf();
        let k = manifest.epoch;
        let net: Net = load(checkpoint_paths(&src, k).weights, Some(config.board_size))?;
        if net.config != config.net_config() {
            return Err(ExitError::Checkpoint(format!(
                "checkpoint network {:?} does not match config {:?}",
                net.config,
                config.net_config()
            )));
        }
        let velocity: Net = load(momentum_path(&src, k), Some(config.board_size))?;
        let mut run = ExitRun {
            optimizer: SgdMomentum { velocity },
            buffer: ReplayBuffer::new(config.buffer_capacity),
            calibration: VecDeque::new(),
            threshold: manifest.resign_threshold,
            epoch: k,
            games_played: manifest.games_played,
            net,
            out_dir: out_dir.clone(),
            config,
        };
        let same_dir = fs::canonicalize(&src)? == fs::canonicalize(&out_dir)?;
        for e in 1..=k {
            let path = games_path(&src, e);
            let text = fs::read_to_string(&path)
                .map_err(|err| ExitError::Checkpoint(format!("{}: {err}", path.display())))?;
            if !same_dir {
                fs::write(games_path(&out_dir, e), &text)?;
            }
            for record in read_records(&text)? {
                run.absorb(record)?;
            }
        }
        if run.buffer.len() != manifest.buffer_size {
            return Err(ExitError::Checkpoint(format!(
                "rebuilt buffer holds {} examples, manifest says {}",
                run.buffer.len(),
                manifest.buffer_size
            )));
        }
        if !same_dir {
            fs::write(out_dir.join("config.toml"), run.config.to_kv_text())?;
            run.save_checkpoint(&manifest)?;
        }
        Ok(run)
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn config(&self) -> &ExitConfig {
        &self.config
    }

    /// Adds a finished game to the buffer and, if resignation was off, to
    /// the calibration window.
    fn absorb(&mut self, record: GameRecord) -> Result<(), ExitError> {
        self.buffer.extend(training_examples(&record)?);
        if record.resign_enabled == Some(false) {
            self.calibration.push_back(record);
            if self.calibration.len() > self.config.resign.window {
                self.calibration.pop_front();
            }
        }
        Ok(())
    }

    fn play_game(&self, epoch: u32, game: u32) -> Result<GameRecord, ExitError> {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, &[epoch as u64, game as u64]));
        let enabled = rng.random::<f64>() < self.config.resign.resign_fraction;
        let resign = super::ResignConfig {
            threshold: self.threshold,
            ..self.config.resign.clone()
        };
        self_play_game(&self.net, &self.config, &resign, enabled, &mut rng)
    }

    /// Plays the epoch's games, in game order whatever the worker count.
    fn generate(&self, epoch: u32) -> Result<Vec<GameRecord>, ExitError> {
        let games = self.config.games_per_epoch;
        let workers = self.config.workers.min(games as usize);
        if workers <= 1 {
            return (0..games).map(|g| self.play_game(epoch, g)).collect();
        }
        let mut slots: Vec<Option<Result<GameRecord, ExitError>>> =
            (0..games).map(|_| None).collect();
        std::thread::scope(|scope| {
            let (tx, rx) = mpsc::channel();
            for w in 0..workers {
                let tx = tx.clone();
                scope.spawn(move || {
                    for g in (w as u32..games).step_by(workers) {
                        if tx.send((g, self.play_game(epoch, g))).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(tx);
            for (g, result) in rx {
                slots[g as usize] = Some(result);
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("every game reported"))
            .collect()
    }

    fn train(&mut self, epoch: u32) -> Result<(f64, f64), ExitError> {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, &[epoch as u64, TRAIN_TAG]));
        let (mut policy, mut value, mut steps) = (0.0, 0.0, 0);
        for _ in 0..self.config.train_steps_per_epoch {
            if self.buffer.is_empty() {
                break;
            }
            let batch = self.buffer.sample_batch(self.config.batch_size, &mut rng);
            let losses = train_step(
                &mut self.net,
                &mut self.optimizer,
                &batch,
                self.config.lr as f32,
                self.config.momentum as f32,
                self.config.l2 as f32,
            )?;
            policy += losses.policy;
            value += losses.value;
            steps += 1;
        }
        if !self.net.all_finite() {
            return Err(ExitError::Net(crate::net::NetError::NonFinite(
                "network parameters after training",
            )));
        }
        let steps = steps.max(1) as f64;
        Ok((policy / steps, value / steps))
    }

    fn save_checkpoint(&self, summary: &EpochSummary) -> Result<Checkpoint, ExitError> {
        let paths = checkpoint_paths(&self.out_dir, summary.epoch);
        save(&self.net, &paths.weights)?;
        save(
            &self.optimizer.velocity,
            momentum_path(&self.out_dir, summary.epoch),
        )?;
        fs::write(
            &paths.manifest,
            toml::to_string(summary).expect("summary serializes"),
        )?;
        Ok(paths)
    }

    /// Runs one epoch and writes its checkpoint.
    pub fn run_epoch(&mut self) -> Result<EpochSummary, ExitError> {
        let epoch = self.epoch + 1;
        let threshold_in_force = self.threshold;
        let games = self.generate(epoch)?;

        let mut file = fs::File::create(games_path(&self.out_dir, epoch))?;
        for g in &games {
            writeln!(file, "{}", g.to_line())?;
        }
        file.flush()?;

        let total_moves: usize = games.iter().map(|g| g.moves.len()).sum();
        let resigned = games.iter().filter(|g| g.resigned).count() as u32;
        let held_out: Vec<GameRecord> = games
            .iter()
            .filter(|g| g.resign_enabled == Some(false))
            .cloned()
            .collect();
        let (fpr, held_count) = false_positive_rate(&held_out, threshold_in_force);
        for g in games.iter().cloned() {
            self.absorb(g)?;
        }
        let window: Vec<GameRecord> = self.calibration.iter().cloned().collect();
        if let Ok(t) = calibrate_resign_threshold(
            &window,
            self.config.resign.target_fpr,
            self.config.resign.min_games,
        ) {
            self.threshold = t;
        }

        let (policy_loss, value_loss) = self.train(epoch)?;
        self.epoch = epoch;
        self.games_played += games.len() as u64;
        let summary = EpochSummary {
            epoch,
            games_played: self.games_played,
            buffer_size: self.buffer.len(),
            resign_threshold: self.threshold,
            threshold_in_force,
            policy_loss,
            value_loss,
            games: games.len() as u32,
            resigned_games: resigned,
            mean_game_length: total_moves as f64 / games.len().max(1) as f64,
            held_out_games: held_count as u32,
            held_out_false_positives: (fpr * held_count as f64).round() as u32,
        };
        self.save_checkpoint(&summary)?;
        Ok(summary)
    }

    /// Runs the remaining epochs, reporting each summary as it completes.
    pub fn run(
        &mut self,
        mut on_epoch: impl FnMut(&EpochSummary),
    ) -> Result<Vec<Checkpoint>, ExitError> {
        let mut written = Vec::new();
        while self.epoch < self.config.epochs {
            let summary = self.run_epoch()?;
            on_epoch(&summary);
            written.push(checkpoint_paths(&self.out_dir, summary.epoch));
        }
        Ok(written)
    }
}

/// Runs a fresh Expert Iteration training to completion and returns the
/// per-epoch checkpoints. The initial network is also saved, as epoch 0.
pub fn exit_run(
    config: ExitConfig,
    out_dir: impl Into<PathBuf>,
) -> Result<Vec<Checkpoint>, ExitError> {
    ExitRun::start(config, out_dir)?.run(|_| {})
}
