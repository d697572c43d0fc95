use crate::search::SearchConfig;
use crate::Net;

use super::agent::{Agent, AgentKind, AgentSpec, NetAgent};
use super::elo::{estimate_elo, EloTable};
use super::tournament::{round_robin, MatchRecord, TournamentConfig};
use super::ArenaError;

pub const SCALING_CSV_HEADER: &str = "algorithm,iterations,elo,ci_low,ci_high";

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub algorithm: String,
    pub iterations: u32,
    pub elo: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stderr: f64,
}

/// One grid point: its games and the ratings fitted to them.
#[derive(Clone, Debug)]
pub struct ScalingPoint {
    pub iterations: u32,
    pub records: Vec<MatchRecord>,
    pub table: EloTable,
}

/// Plays one round robin per iteration count, always including the raw
/// network as the zero anchor. Every point uses the same tournament seed.
pub fn scaling_experiment(
    agents: &[AgentSpec],
    grid: &[u32],
    nets: &[Net],
    search: &SearchConfig,
    tournament: &TournamentConfig,
) -> Result<Vec<ScalingPoint>, ArenaError> {
    if grid.is_empty() {
        return Err(ArenaError::EmptyGrid);
    }
    let mut specs = vec![AgentSpec::new(AgentKind::Raw)];
    specs.extend(agents.iter().filter(|s| s.kind != AgentKind::Raw).cloned());
    let mut points = Vec::with_capacity(grid.len());
    for &iterations in grid {
        let built = NetAgent::build_all(&specs, nets, &search.clone().with_iterations(iterations))?;
        let refs: Vec<&dyn Agent> = built.iter().map(|a| a as &dyn Agent).collect();
        let records = round_robin(&refs, tournament)?;
        let table = estimate_elo(&records, "raw")?;
        points.push(ScalingPoint {
            iterations,
            records,
            table,
        });
    }
    Ok(points)
}

/// Rows for every non-anchor agent at every grid point.
pub fn scaling_rows(points: &[ScalingPoint]) -> Vec<ScalingRow> {
    let mut rows = Vec::new();
    for p in points {
        for e in p.table.entries.iter().filter(|e| e.agent != p.table.anchor) {
            rows.push(ScalingRow {
                algorithm: e.agent.clone(),
                iterations: p.iterations,
                elo: e.elo,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                stderr: e.stderr,
            });
        }
    }
    rows
}

pub fn scaling_to_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(SCALING_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.1},{:.1},{:.1}\n",
            r.algorithm, r.iterations, r.elo, r.ci_low, r.ci_high
        ));
    }
    out
}
