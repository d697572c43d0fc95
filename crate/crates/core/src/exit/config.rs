use serde::{Deserialize, Serialize};

use crate::net::NetConfig;
use crate::search::{Algorithm, NoiseConfig, SearchConfig};

use super::resign::ResignConfig;
use super::ExitError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitConfig {
    pub board_size: usize,
    pub expert: Algorithm,
    /// Inner learning rate of the PGS expert.
    pub pgs_alpha: f64,
    /// Moves chosen proportionally to visits before play turns greedy.
    /// Defaults to `round(30 n² / 81)`.
    pub sampling_moves: Option<u32>,
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub l2: f64,
    pub epochs: u32,
    pub games_per_epoch: u32,
    pub train_steps_per_epoch: u32,
    pub workers: usize,
    pub buffer_capacity: usize,
    pub seed: u64,
    pub channels: usize,
    pub trunk_layers: usize,
    pub value_hidden: usize,
    pub search: SearchConfig,
    pub noise: NoiseConfig,
    pub resign: ResignConfig,
}

impl Default for ExitConfig {
    fn default() -> Self {
        let net = NetConfig::new(5);
        ExitConfig {
            board_size: 5,
            expert: Algorithm::Pgs,
            pgs_alpha: 5e-4,
            sampling_moves: None,
            lr: 0.01,
            momentum: 0.9,
            batch_size: 256,
            l2: 1e-4,
            epochs: 40,
            games_per_epoch: 100,
            train_steps_per_epoch: 200,
            workers: 1,
            buffer_capacity: 200_000,
            seed: 0,
            channels: net.channels,
            trunk_layers: net.trunk_layers,
            value_hidden: net.value_hidden,
            search: SearchConfig::default().with_iterations(100),
            noise: NoiseConfig::default(),
            resign: ResignConfig::default(),
        }
    }
}

impl ExitConfig {
    pub fn net_config(&self) -> NetConfig {
        NetConfig {
            size: self.board_size,
            channels: self.channels,
            trunk_layers: self.trunk_layers,
            value_hidden: self.value_hidden,
        }
    }

    pub fn sampling_moves(&self) -> u32 {
        self.sampling_moves.unwrap_or_else(|| {
            (30.0 * (self.board_size * self.board_size) as f64 / 81.0).round() as u32
        })
    }

    /// Search settings for one expert move.
    pub fn move_search(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            seed,
            pgs_alpha: (self.expert == Algorithm::Pgs).then_some(self.pgs_alpha),
            dirichlet: Some(self.noise),
            ..self.search.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ExitError> {
        let bad = |msg: String| Err(ExitError::Config(msg));
        self.net_config()
            .validate()
            .map_err(|e| ExitError::Config(e.to_string()))?;
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad(format!("lr {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum {}", self.momentum));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 {}", self.l2));
        }
        if !(self.pgs_alpha.is_finite() && self.pgs_alpha >= 0.0) {
            return bad(format!("pgs_alpha {}", self.pgs_alpha));
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("epochs", self.epochs as usize),
            ("games_per_epoch", self.games_per_epoch as usize),
            ("workers", self.workers),
            ("buffer_capacity", self.buffer_capacity),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.search.pgs_alpha.is_some() || self.search.dirichlet.is_some() {
            return bad("set pgs_alpha and noise at the top level, not under [search]".into());
        }
        self.move_search(0)
            .validate()
            .map_err(|e| ExitError::Config(e.to_string()))?;
        self.noise.validate().map_err(ExitError::Config)?;
        self.resign.validate().map_err(ExitError::Config)?;
        Ok(())
    }

    /// Parses `key = value` text (TOML); unknown keys are errors.
    pub fn from_kv_text(text: &str) -> Result<ExitConfig, ExitError> {
        let config: ExitConfig =
            toml::from_str(text).map_err(|e| ExitError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_kv_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
