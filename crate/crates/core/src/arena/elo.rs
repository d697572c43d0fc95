//! Bradley-Terry ratings on the Elo scale.
//!
//! `P(i beats j) = 1 / (1 + 10^((R_j - R_i) / 400))`. Ratings are the
//! posterior mode under independent Gaussian priors (sd 350) found by
//! Newton's method; intervals come from the inverse of the negative Hessian.
//! The anchor is subtracted afterwards, so it sits at exactly 0.

use super::tournament::MatchRecord;
use super::ArenaError;

pub const PRIOR_SIGMA: f64 = 350.0;
pub const ELO_CSV_HEADER: &str = "agent,elo,ci_low,ci_high";
const Z95: f64 = 1.959_963_984_540_054;
const K: f64 = std::f64::consts::LN_10 / 400.0;

#[derive(Clone, Debug, PartialEq)]
pub struct EloEntry {
    pub agent: String,
    pub elo: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Standard error of the rating relative to the anchor.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EloTable {
    pub anchor: String,
    pub entries: Vec<EloEntry>,
    /// Posterior covariance of the unanchored ratings, in entry order.
    covariance: Vec<Vec<f64>>,
}

impl EloTable {
    pub fn get(&self, agent: &str) -> Option<&EloEntry> {
        self.entries.iter().find(|e| e.agent == agent)
    }

    fn index(&self, agent: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.agent == agent)
    }

    /// `R_a - R_b` and its standard error.
    pub fn gap(&self, a: &str, b: &str) -> Option<(f64, f64)> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        let c = &self.covariance;
        let var = c[i][i] + c[j][j] - 2.0 * c[i][j];
        Some((
            self.entries[i].elo - self.entries[j].elo,
            var.max(0.0).sqrt(),
        ))
    }

    /// Whether `a` is rated above `b` at two-sided 95% confidence.
    pub fn significantly_above(&self, a: &str, b: &str) -> bool {
        self.gap(a, b).is_some_and(|(d, se)| d - Z95 * se > 0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(ELO_CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{:.1},{:.1},{:.1}\n",
                e.agent, e.elo, e.ci_low, e.ci_high
            ));
        }
        out
    }
}

/// Ratings for every agent appearing in `records`, in order of appearance.
pub fn estimate_elo(records: &[MatchRecord], anchor: &str) -> Result<EloTable, ArenaError> {
    let mut agents: Vec<String> = Vec::new();
    for r in records {
        for id in [&r.agent_a, &r.agent_b] {
            if !agents.contains(id) {
                agents.push(id.clone());
            }
        }
    }
    estimate_elo_for(&agents, records, anchor)
}

/// Ratings for `agents`; every one of them must have played.
pub fn estimate_elo_for(
    agents: &[String],
    records: &[MatchRecord],
    anchor: &str,
) -> Result<EloTable, ArenaError> {
    let index = |id: &str| agents.iter().position(|a| a == id);
    let m = agents.len();
    let mut wins = vec![vec![0u64; m]; m];
    for r in records {
        let w = index(&r.winner).ok_or_else(|| ArenaError::UnknownAgent(r.winner.clone()))?;
        let l = index(r.loser()).ok_or_else(|| ArenaError::UnknownAgent(r.loser().to_string()))?;
        wins[w][l] += 1;
    }
    elo_from_wins(agents, &wins, anchor, PRIOR_SIGMA)
}

/// Core estimator on a win matrix: `wins[i][j]` games `i` won against `j`.
pub fn elo_from_wins(
    agents: &[String],
    wins: &[Vec<u64>],
    anchor: &str,
    prior_sigma: f64,
) -> Result<EloTable, ArenaError> {
    let m = agents.len();
    let a = agents
        .iter()
        .position(|x| x == anchor)
        .ok_or_else(|| ArenaError::UnknownAnchor(anchor.to_string()))?;
    for (i, id) in agents.iter().enumerate() {
        let games: u64 = (0..m).map(|j| wins[i][j] + wins[j][i]).sum();
        if games == 0 {
            return Err(ArenaError::NoGames(id.clone()));
        }
    }
    let precision = 1.0 / (prior_sigma * prior_sigma);
    let log_post = |r: &[f64]| -> f64 {
        let mut lp = -0.5 * precision * r.iter().map(|x| x * x).sum::<f64>();
        for i in 0..m {
            for j in 0..m {
                if wins[i][j] > 0 {
                    lp -= wins[i][j] as f64 * (1.0 + (-K * (r[i] - r[j])).exp()).ln();
                }
            }
        }
        lp
    };
    let mut r = vec![0.0; m];
    let mut neg_hessian = vec![vec![0.0; m]; m];
    for _ in 0..200 {
        let mut grad = vec![0.0; m];
        for row in neg_hessian.iter_mut() {
            row.fill(0.0);
        }
        for i in 0..m {
            grad[i] -= precision * r[i];
            neg_hessian[i][i] += precision;
            for j in 0..m {
                let n = (wins[i][j] + wins[j][i]) as f64;
                if i == j || n == 0.0 {
                    continue;
                }
                let p = 1.0 / (1.0 + (-K * (r[i] - r[j])).exp());
                grad[i] += K * (wins[i][j] as f64 - n * p);
                let h = K * K * n * p * (1.0 - p);
                neg_hessian[i][i] += h;
                neg_hessian[i][j] -= h;
            }
        }
        let step = solve_spd(&neg_hessian, &grad);
        // Backtrack in case a full Newton step overshoots.
        let base = log_post(&r);
        let mut scale = 1.0;
        let mut next: Vec<f64>;
        loop {
            next = r.iter().zip(&step).map(|(x, s)| x + scale * s).collect();
            if log_post(&next) >= base - 1e-12 || scale < 1e-6 {
                break;
            }
            scale *= 0.5;
        }
        let moved = step.iter().map(|s| (scale * s).abs()).fold(0.0, f64::max);
        r = next;
        if moved < 1e-9 {
            break;
        }
    }
    let covariance = invert_spd(&neg_hessian);
    let entries = agents
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let elo = r[i] - r[a];
            let var = covariance[i][i] + covariance[a][a] - 2.0 * covariance[i][a];
            let se = if i == a { 0.0 } else { var.max(0.0).sqrt() };
            EloEntry {
                agent: id.clone(),
                elo: if i == a { 0.0 } else { elo },
                ci_low: elo - Z95 * se,
                ci_high: elo + Z95 * se,
                stderr: se,
            }
        })
        .collect();
    Ok(EloTable {
        anchor: anchor.to_string(),
        entries,
        covariance,
    })
}

fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).max(1e-300).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let l = cholesky(a);
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

fn invert_spd(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            solve_spd(a, &e)
        })
        .collect();
    (0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect()
}

/// Win matrix for a two-agent match.
pub fn head_to_head(a_wins: u64, b_wins: u64) -> (Vec<String>, Vec<Vec<u64>>) {
    (
        vec!["a".into(), "b".into()],
        vec![vec![0, a_wins], vec![b_wins, 0]],
    )
}
