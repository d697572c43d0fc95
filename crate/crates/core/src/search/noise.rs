//! Dirichlet exploration noise for the root prior.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Weight of the noise in the mixture.
    pub mix: f64,
    /// Symmetric Dirichlet concentration.
    pub concentration: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            mix: 0.25,
            concentration: 0.12,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.mix) {
            return Err(format!("noise mix {}", self.mix));
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return Err(format!("noise concentration {}", self.concentration));
        }
        Ok(())
    }
}

/// Draws from a symmetric Dirichlet of dimension `len`.
pub fn sample_dirichlet(len: usize, concentration: f64, rng: &mut impl Rng) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut eta: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
    let total: f64 = eta.iter().sum();
    if total > 0.0 && total.is_finite() {
        eta.iter_mut().for_each(|v| *v /= total);
    } else {
        // Every gamma draw underflowed: fall back to the distribution's mean.
        eta.fill(1.0 / len as f64);
    }
    eta
}

/// `(1 - mix) * prior + mix * eta` with `eta` given.
pub fn mix_noise(prior: &[f64], eta: &[f64], mix: f64) -> Vec<f64> {
    prior
        .iter()
        .zip(eta)
        .map(|(&p, &e)| (1.0 - mix) * p + mix * e)
        .collect()
}

/// Mixes Dirichlet noise into a prior given over the legal actions only.
pub fn apply_root_noise(prior: &[f64], noise: &NoiseConfig, rng: &mut impl Rng) -> Vec<f64> {
    if noise.mix == 0.0 {
        return prior.to_vec();
    }
    let eta = sample_dirichlet(prior.len(), noise.concentration, rng);
    mix_noise(prior, &eta, noise.mix)
}
