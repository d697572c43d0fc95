use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hex::Action;

use super::puct::TreeNode;

/// Root statistics of a finished search. Per-action vectors cover all `n²`
/// cells; illegal cells hold zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub board_size: usize,
    pub visits: Vec<u32>,
    /// Mean return per action; zero where unvisited.
    pub q: Vec<f64>,
    /// Root prior actually used by the search (after noise).
    pub prior: Vec<f64>,
    /// Expert policy `n(s0, a) / n(s0)`.
    pub policy: Vec<f64>,
    /// Visit-weighted mean return at the root, for the player to move.
    pub root_value: f64,
}

impl SearchResult {
    pub(crate) fn from_root(board_size: usize, root: &TreeNode) -> SearchResult {
        let cells = board_size * board_size;
        let mut visits = vec![0; cells];
        let mut q = vec![0.0; cells];
        let mut prior = vec![0.0; cells];
        let mut total_r = 0.0;
        for ((a, e), &p) in root.actions.iter().zip(&root.edges).zip(&root.prior) {
            visits[a.index()] = e.n;
            q[a.index()] = e.q().unwrap_or(0.0);
            prior[a.index()] = p;
            total_r += e.r;
        }
        let total: u32 = visits.iter().sum();
        let policy = visits
            .iter()
            .map(|&v| v as f64 / total.max(1) as f64)
            .collect();
        SearchResult {
            board_size,
            visits,
            q,
            prior,
            policy,
            root_value: if total > 0 {
                total_r / total as f64
            } else {
                0.0
            },
        }
    }

    pub fn total_visits(&self) -> u32 {
        self.visits.iter().sum()
    }

    /// Expert policy as stored in game records.
    pub fn policy_f32(&self) -> Vec<f32> {
        self.policy.iter().map(|&p| p as f32).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectMode {
    Greedy,
    Proportional,
}

/// Picks a move from the root visit counts. Greedy ties break on higher Q,
/// then lower index.
pub fn select_action(result: &SearchResult, mode: SelectMode, rng: &mut impl Rng) -> Action {
    let total = result.total_visits();
    assert!(total > 0, "select_action on an empty search result");
    match mode {
        SelectMode::Greedy => {
            let mut best = 0;
            for i in 1..result.visits.len() {
                let (v, b) = (result.visits[i], result.visits[best]);
                if v > b || (v == b && result.q[i] > result.q[best]) {
                    best = i;
                }
            }
            Action(best as u16)
        }
        SelectMode::Proportional => {
            let mut pick = rng.random_range(0..total);
            for (i, &v) in result.visits.iter().enumerate() {
                if pick < v {
                    return Action(i as u16);
                }
                pick -= v;
            }
            unreachable!("pick below total visits")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn result(visits: &[u32], q: &[f64]) -> SearchResult {
        let total: u32 = visits.iter().sum();
        SearchResult {
            board_size: 0,
            visits: visits.to_vec(),
            q: q.to_vec(),
            prior: vec![0.0; visits.len()],
            policy: visits.iter().map(|&v| v as f64 / total as f64).collect(),
            root_value: 0.0,
        }
    }

    #[test]
    fn greedy_takes_most_visits_then_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = result(&[10, 5, 1], &[0.0, 0.9, 0.9]);
        assert_eq!(select_action(&r, SelectMode::Greedy, &mut rng), Action(0));
        let r = result(&[10, 10, 0], &[0.1, 0.3, 0.0]);
        assert_eq!(select_action(&r, SelectMode::Greedy, &mut rng), Action(1));
        let r = result(&[3, 3], &[0.2, 0.2]);
        assert_eq!(select_action(&r, SelectMode::Greedy, &mut rng), Action(0));
    }

    #[test]
    fn proportional_matches_visit_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let r = result(&[750, 250, 0], &[0.0; 3]);
        let mut counts = [0u32; 3];
        for _ in 0..10_000 {
            counts[select_action(&r, SelectMode::Proportional, &mut rng).index()] += 1;
        }
        assert_eq!(counts[2], 0);
        assert!((counts[0] as f64 / 1e4 - 0.75).abs() < 0.02);
        assert!((counts[1] as f64 / 1e4 - 0.25).abs() < 0.02);
    }
}
