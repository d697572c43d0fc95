use serde::{Deserialize, Serialize};

use super::noise::NoiseConfig;
use super::SearchError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub iterations: u32,
    /// Simulations selected before one joint leaf evaluation.
    pub batch_size: u32,
    pub c_puct: f64,
    pub virtual_loss_weight: f64,
    pub seed: u64,
    /// REINFORCE learning rate for PGS. Required by PGS, ignored otherwise.
    pub pgs_alpha: Option<f64>,
    pub pgs_baseline: f64,
    /// Adapt the whole network during PGS instead of the policy head only.
    pub pgs_full_network: bool,
    pub dirichlet: Option<NoiseConfig>,
    /// Q used for edges that have not been visited yet.
    pub unvisited_q: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            iterations: 800,
            batch_size: 8,
            c_puct: 5.0,
            virtual_loss_weight: 1.0,
            seed: 0,
            pgs_alpha: None,
            pgs_baseline: 0.0,
            pgs_full_network: false,
            dirichlet: None,
            unvisited_q: 0.0,
        }
    }
}

impl SearchConfig {
    /// Sets the iteration count, shrinking the batch if it would exceed it.
    pub fn with_iterations(mut self, iterations: u32) -> Self {
        self.iterations = iterations;
        self.batch_size = self.batch_size.min(iterations).max(1);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.pgs_alpha = Some(alpha);
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: String| Err(SearchError::Config(msg));
        if self.batch_size < 1 || self.iterations < self.batch_size {
            return bad(format!(
                "need iterations >= batch_size >= 1, got {} and {}",
                self.iterations, self.batch_size
            ));
        }
        if !(self.c_puct.is_finite() && self.c_puct >= 0.0) {
            return bad(format!("c_puct {}", self.c_puct));
        }
        if !(self.virtual_loss_weight.is_finite() && self.virtual_loss_weight >= 0.0) {
            return bad(format!("virtual_loss_weight {}", self.virtual_loss_weight));
        }
        if !(-1.0..=1.0).contains(&self.unvisited_q) {
            return bad(format!("unvisited_q {}", self.unvisited_q));
        }
        if let Some(alpha) = self.pgs_alpha {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return bad(format!("pgs_alpha {alpha}"));
            }
        }
        if !self.pgs_baseline.is_finite() {
            return bad(format!("pgs_baseline {}", self.pgs_baseline));
        }
        if let Some(noise) = &self.dirichlet {
            noise.validate().map_err(SearchError::Config)?;
        }
        Ok(())
    }

    /// Parses `key = value` text; unknown keys are errors.
    pub fn from_kv_text(text: &str) -> Result<SearchConfig, SearchError> {
        let config: SearchConfig =
            toml::from_str(text).map_err(|e| SearchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_kv_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SearchConfig::default();
        assert_eq!(c.c_puct, 5.0);
        assert_eq!(c.iterations, 800);
        c.validate().unwrap();
    }

    #[test]
    fn kv_text_round_trips_and_rejects_unknown_keys() {
        let c = SearchConfig::default()
            .with_alpha(5e-4)
            .with_iterations(100);
        let back = SearchConfig::from_kv_text(&c.to_kv_text()).unwrap();
        assert_eq!(back, c);
        let parsed =
            SearchConfig::from_kv_text("iterations = 64\nbatch_size = 4\npgs_alpha = 0.001\n")
                .unwrap();
        assert_eq!(parsed.iterations, 64);
        assert_eq!(parsed.pgs_alpha, Some(0.001));
        assert!(SearchConfig::from_kv_text("iteration = 5").is_err());
        assert!(SearchConfig::from_kv_text("iterations = 4\nbatch_size = 8").is_err());
    }

    #[test]
    fn with_iterations_clamps_batch() {
        let c = SearchConfig::default().with_iterations(1);
        assert_eq!(c.batch_size, 1);
        c.validate().unwrap();
    }
}
