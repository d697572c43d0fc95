//! Node statistics and the PUCT selection rule.

use crate::hex::Action;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeStats {
    /// Completed traversals `n(s, a)`.
    pub n: u32,
    /// Sum of returns `r(s, a)` from the perspective of the player at `s`.
    pub r: f64,
    /// Traversals selected in the current batch but not yet backed up.
    pub virtual_losses: u32,
}

impl EdgeStats {
    pub fn q(&self) -> Option<f64> {
        (self.n > 0).then(|| self.r / self.n as f64)
    }

    pub fn backup(&mut self, value: f64) {
        self.n += 1;
        self.r += value;
    }
}

pub(crate) const UNEXPANDED: u32 = u32::MAX;
pub(crate) const TERMINAL: u32 = u32::MAX - 1;

/// A node of the search tree. The root-bandit searchers use a lone root.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    /// Visit count `n(s)`.
    pub n: u32,
    pub actions: Vec<Action>,
    /// Prior `pi(s, a)` per entry of `actions`, fixed at expansion.
    pub prior: Vec<f64>,
    pub edges: Vec<EdgeStats>,
    /// Child node index per edge, or one of the sentinels above.
    pub(crate) children: Vec<u32>,
}

/// Parameters of the PUCT rule that are not stored in the node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PuctParams {
    pub c_puct: f64,
    pub unvisited_q: f64,
    pub virtual_loss_weight: f64,
}

impl PuctParams {
    pub fn new(c_puct: f64) -> Self {
        PuctParams {
            c_puct,
            unvisited_q: 0.0,
            virtual_loss_weight: 1.0,
        }
    }
}

impl TreeNode {
    pub fn new(actions: Vec<Action>, prior: Vec<f64>, n: u32) -> TreeNode {
        assert_eq!(actions.len(), prior.len());
        let len = actions.len();
        TreeNode {
            n,
            actions,
            prior,
            edges: vec![EdgeStats::default(); len],
            children: vec![UNEXPANDED; len],
        }
    }

    pub fn pending_virtual_losses(&self) -> u64 {
        self.edges.iter().map(|e| e.virtual_losses as u64).sum()
    }

    /// PUCT score of every edge. Pending traversals count as losses:
    /// an edge with `vl` of them is scored as if it had `n + vl` visits and
    /// return `r - vl`, and the parent as if it had `n(s) + sum vl` visits.
    pub fn puct_scores(&self, params: &PuctParams) -> Vec<f64> {
        let w = params.virtual_loss_weight;
        let parent = self.n as f64 + w * self.pending_virtual_losses() as f64;
        let sqrt_parent = parent.sqrt();
        self.edges
            .iter()
            .zip(&self.prior)
            .map(|(e, &p)| {
                let vl = w * e.virtual_losses as f64;
                let n = e.n as f64 + vl;
                let q = if n > 0.0 {
                    (e.r - vl) / n
                } else {
                    params.unvisited_q
                };
                q + params.c_puct * p * sqrt_parent / (1.0 + n)
            })
            .collect()
    }

    /// Edge index maximising PUCT; ties go to the higher prior, then the
    /// lower action index.
    pub fn puct_select(&self, params: &PuctParams) -> usize {
        let scores = self.puct_scores(params);
        let mut best = 0;
        for i in 1..scores.len() {
            let better = scores[i] > scores[best]
                || (scores[i] == scores[best]
                    && (self.prior[i] > self.prior[best]
                        || (self.prior[i] == self.prior[best]
                            && self.actions[i].index() < self.actions[best].index())));
            if better {
                best = i;
            }
        }
        best
    }
}
