//! Resignation threshold calibration.
//!
//! A game is a false positive at threshold `t` if the player who went on to
//! win saw a root value below `t` on one of its own moves, i.e. it would
//! have resigned a won game. Only games played with resignation disabled can
//! measure this.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hex::GameRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResignConfig {
    /// Fraction of self-play games in which resignation is allowed.
    pub resign_fraction: f64,
    pub target_fpr: f64,
    /// Threshold in force; `-1` disables resignation.
    pub threshold: f64,
    /// Most recent no-resign games kept for calibration.
    pub window: usize,
    pub min_games: usize,
}

impl Default for ResignConfig {
    fn default() -> Self {
        ResignConfig {
            resign_fraction: 0.9,
            target_fpr: 0.05,
            threshold: -1.0,
            window: 500,
            min_games: 50,
        }
    }
}

impl ResignConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.resign_fraction) {
            return Err(format!("resign_fraction {}", self.resign_fraction));
        }
        if !(self.target_fpr > 0.0 && self.target_fpr < 1.0) {
            return Err(format!("target_fpr {}", self.target_fpr));
        }
        if !(-1.0..0.0).contains(&self.threshold) {
            return Err(format!("threshold {} outside [-1, 0)", self.threshold));
        }
        if self.min_games == 0 || self.window < self.min_games {
            return Err(format!(
                "need window >= min_games >= 1, got {} and {}",
                self.window, self.min_games
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ResignError {
    #[error("calibration needs {need} no-resign games with root values, have {have}")]
    InsufficientData { have: usize, need: usize },
}

/// Highest threshold the calibration may return; zero itself is excluded.
pub const MAX_THRESHOLD: f64 = -1e-3;

/// Lowest root value the eventual winner saw on its own moves, or `None` for
/// records that cannot be used (resigned games, missing values).
pub fn winner_min_value(record: &GameRecord) -> Option<f64> {
    if record.resigned || record.resign_enabled == Some(true) {
        return None;
    }
    let values = record.root_values.as_ref()?;
    let winner = record.winner().ok()?;
    // Black moves at even plies.
    let first = if winner == crate::hex::Player::Black {
        0
    } else {
        1
    };
    values
        .iter()
        .skip(first)
        .step_by(2)
        .map(|&v| v as f64)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
}

/// Fraction of usable records that would have resigned a won game at
/// `threshold`, with the number of usable records.
pub fn false_positive_rate(records: &[GameRecord], threshold: f64) -> (f64, usize) {
    let mins: Vec<f64> = records.iter().filter_map(winner_min_value).collect();
    if mins.is_empty() {
        return (0.0, 0);
    }
    let fp = mins.iter().filter(|&&m| m < threshold).count();
    (fp as f64 / mins.len() as f64, mins.len())
}

/// Largest threshold in `[-1, MAX_THRESHOLD]` whose false-positive rate over
/// `records` is at most `target_fpr`.
pub fn calibrate_resign_threshold(
    records: &[GameRecord],
    target_fpr: f64,
    min_games: usize,
) -> Result<f64, ResignError> {
    let mut mins: Vec<f64> = records.iter().filter_map(winner_min_value).collect();
    if mins.len() < min_games.max(1) {
        return Err(ResignError::InsufficientData {
            have: mins.len(),
            need: min_games.max(1),
        });
    }
    mins.sort_by(f64::total_cmp);
    // At most k games may lie strictly below t, so t can rise to the
    // (k+1)-th smallest minimum.
    let k = (target_fpr * mins.len() as f64 + 1e-9).floor() as usize;
    let t = mins.get(k).copied().unwrap_or(f64::INFINITY);
    Ok(t.clamp(-1.0, MAX_THRESHOLD))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hex::{Action, Player};

    /// A no-resign record whose winner saw `winner_values` on its moves and
    /// whose loser saw -0.9 throughout.
    fn record(winner: Player, winner_values: &[f32]) -> GameRecord {
        let mut rec = GameRecord::new(3, &[Action(0)], winner);
        let mut values = Vec::new();
        for &v in winner_values {
            if winner == Player::Black {
                values.extend([v, -0.9]);
            } else {
                values.extend([-0.9, v]);
            }
        }
        rec.root_values = Some(values);
        rec.resign_enabled = Some(false);
        rec
    }

    #[test]
    fn winner_minimum_reads_only_the_winners_moves() {
        assert_eq!(
            winner_min_value(&record(Player::Black, &[0.2, -0.3, 0.5])),
            Some(-0.3f32 as f64)
        );
        assert_eq!(
            winner_min_value(&record(Player::White, &[0.4, 0.1])),
            Some(0.1f32 as f64)
        );
        let mut resigned = record(Player::Black, &[0.1]);
        resigned.resign_enabled = Some(true);
        assert_eq!(winner_min_value(&resigned), None);
    }

    #[test]
    fn empty_or_small_sets_are_rejected() {
        assert_eq!(
            calibrate_resign_threshold(&[], 0.05, 50),
            Err(ResignError::InsufficientData { have: 0, need: 50 })
        );
        let few: Vec<_> = (0..10).map(|_| record(Player::Black, &[0.0])).collect();
        assert!(calibrate_resign_threshold(&few, 0.05, 50).is_err());
    }

    #[test]
    fn winners_above_minus_half_allow_at_least_minus_half() {
        let recs: Vec<_> = (0..60)
            .map(|i| {
                record(
                    if i % 2 == 0 {
                        Player::Black
                    } else {
                        Player::White
                    },
                    &[-0.5 + i as f32 * 0.01],
                )
            })
            .collect();
        let t = calibrate_resign_threshold(&recs, 0.05, 50).unwrap();
        assert!(t >= -0.5);
        assert!(false_positive_rate(&recs, t).0 <= 0.05);
    }

    #[test]
    fn matches_an_exhaustive_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for trial in 0..20 {
            let recs: Vec<_> = (0..80 + trial)
                .map(|_| {
                    let winner = if rng.random_bool(0.5) {
                        Player::Black
                    } else {
                        Player::White
                    };
                    let vals: Vec<f32> = (0..4)
                        .map(|_| (rng.random::<f32>() * 2.0 - 1.0) * 0.9)
                        .collect();
                    record(winner, &vals)
                })
                .collect();
            let t = calibrate_resign_threshold(&recs, 0.05, 50).unwrap();
            // Scan a fine grid plus every observed minimum.
            let mut candidates: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 * 0.0005).collect();
            candidates.extend(recs.iter().filter_map(winner_min_value));
            candidates.push(MAX_THRESHOLD);
            let best = candidates
                .into_iter()
                .filter(|&c| (-1.0..=MAX_THRESHOLD).contains(&c))
                .filter(|&c| false_positive_rate(&recs, c).0 <= 0.05)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(t, best, "trial {trial}");
        }
    }
}
