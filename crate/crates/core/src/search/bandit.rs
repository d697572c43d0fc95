//! Root-bandit search shared by MCS and PGS: PUCT at the root, sampled
//! simulations below it, truncated once the action sequence is new.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hex::{canonical_action, canonical_mask, encode, GameState};
use crate::net::{
    policy_head_forward, reinforce_full_in_place, reinforce_in_place, FullStep, PolicyHead,
    PolicyValueNet, TrajectoryStep,
};
use crate::Scalar;

use super::eval::{sample_canonical, sample_from_head, Evaluator};
use super::puct::{PuctParams, TreeNode};
use super::trie::{simulate_until_unique, SequenceTrie, Simulation};
use super::{root_node, SearchConfig, SearchError, SearchResult, Searcher};

/// Simulation policy below the root.
#[allow(clippy::large_enum_variant)]
enum Rollout<T> {
    /// The global network's policy head (MCS).
    Fixed,
    /// Private copy of the head adapted by REINFORCE (PGS).
    Head { head: PolicyHead<T>, alpha: T },
    /// Private copy of the whole network adapted by REINFORCE.
    Full {
        net: Box<PolicyValueNet<T>>,
        alpha: T,
    },
}

enum Step<T> {
    Untracked,
    Head(TrajectoryStep<T>),
    Full(FullStep<T>),
}

pub struct RootBandit<'a, 'n, T: Scalar> {
    eval: &'a mut Evaluator<'n, T>,
    params: PuctParams,
    rng: ChaCha8Rng,
    root_state: GameState,
    root: TreeNode,
    trie: SequenceTrie,
    rollout: Rollout<T>,
    baseline: T,
    completed: u32,
    longest: usize,
}

impl<'a, 'n, T: Scalar> RootBandit<'a, 'n, T> {
    /// Monte Carlo search: simulations follow the fixed network policy.
    pub fn mcs(
        eval: &'a mut Evaluator<'n, T>,
        state: &GameState,
        config: &SearchConfig,
    ) -> Result<Self, SearchError> {
        Self::build(eval, state, config, Rollout::Fixed)
    }

    /// Policy gradient search. Requires `config.pgs_alpha`.
    pub fn pgs(
        eval: &'a mut Evaluator<'n, T>,
        state: &GameState,
        config: &SearchConfig,
    ) -> Result<Self, SearchError> {
        let alpha = T::of(config.pgs_alpha.ok_or(SearchError::MissingAlpha)?);
        let rollout = if config.pgs_full_network {
            Rollout::Full {
                net: Box::new(eval.net().clone()),
                alpha,
            }
        } else {
            Rollout::Head {
                head: eval.net().policy.clone(),
                alpha,
            }
        };
        Self::build(eval, state, config, rollout)
    }

    fn build(
        eval: &'a mut Evaluator<'n, T>,
        state: &GameState,
        config: &SearchConfig,
        rollout: Rollout<T>,
    ) -> Result<Self, SearchError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let root = root_node(eval, state, config, &mut rng)?;
        Ok(RootBandit {
            eval,
            params: config.puct_params(),
            rng,
            root_state: *state,
            root,
            trie: SequenceTrie::new(),
            rollout,
            baseline: T::of(config.pgs_baseline),
            completed: 0,
            longest: 0,
        })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn trie(&self) -> &SequenceTrie {
        &self.trie
    }

    /// Longest simulation so far, in plies from the root.
    pub fn longest_simulation(&self) -> usize {
        self.longest
    }

    /// The adapted policy head, if this search adapts one.
    pub fn adapted_head(&self) -> Option<&PolicyHead<T>> {
        match &self.rollout {
            Rollout::Fixed => None,
            Rollout::Head { head, .. } => Some(head),
            Rollout::Full { net, .. } => Some(&net.policy),
        }
    }

    fn simulate(&mut self, first_edge: usize) -> Result<Simulation<Step<T>>, SearchError> {
        let first = self.root.actions[first_edge];
        let eval = &mut *self.eval;
        let rng = &mut self.rng;
        let rollout = &self.rollout;
        simulate_until_unique(
            &mut self.trie,
            &self.root_state,
            first,
            |state: &GameState| match rollout {
                Rollout::Fixed => {
                    let features = eval.features(state);
                    let (a, _) = sample_from_head(&features, &eval.net().policy, state, rng)?;
                    Ok((a, Step::Untracked))
                }
                Rollout::Head { head, .. } => {
                    let features = eval.features(state);
                    let (a, mask) = sample_from_head(&features, head, state, rng)?;
                    let action = canonical_action(state, a);
                    Ok((
                        a,
                        Step::Head(TrajectoryStep {
                            features,
                            action,
                            mask,
                        }),
                    ))
                }
                Rollout::Full { net, .. } => {
                    let input = encode(state);
                    let features = net.trunk_forward(&input);
                    let mask = canonical_mask(state);
                    let probs = policy_head_forward(&features, &net.policy, &mask)?;
                    let a = sample_canonical(state, &probs, rng);
                    let action = canonical_action(state, a);
                    Ok((
                        a,
                        Step::Full(FullStep {
                            input,
                            action,
                            mask,
                        }),
                    ))
                }
            },
        )
    }

    fn adapt(&mut self, steps: Vec<Step<T>>, step0_value: f64) -> Result<(), SearchError> {
        let leaf = T::of(step0_value);
        match &mut self.rollout {
            Rollout::Fixed => {}
            Rollout::Head { head, alpha } => {
                let traj: Vec<_> = steps
                    .into_iter()
                    .map(|s| match s {
                        Step::Head(t) => t,
                        _ => unreachable!("head rollout records head steps"),
                    })
                    .collect();
                reinforce_in_place(head, &traj, leaf, self.baseline, *alpha)?;
            }
            Rollout::Full { net, alpha } => {
                let traj: Vec<_> = steps
                    .into_iter()
                    .map(|s| match s {
                        Step::Full(t) => t,
                        _ => unreachable!("full rollout records full steps"),
                    })
                    .collect();
                reinforce_full_in_place(net, &traj, leaf, self.baseline, *alpha)?;
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Searcher for RootBandit<'_, '_, T> {
    fn run_batch(&mut self, batch_size: usize) -> Result<(), SearchError> {
        let mut sims = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            let e = self.root.puct_select(&self.params);
            self.root.edges[e].virtual_losses += 1;
            let sim = self.simulate(e)?;
            self.longest = self.longest.max(sim.actions.len());
            sims.push((e, sim));
        }
        let mut values = Vec::with_capacity(batch_size);
        for (_, sim) in &sims {
            values.push(if sim.leaf.is_terminal() {
                -1.0
            } else {
                self.eval.value(&sim.leaf)?
            });
        }
        for ((e, sim), v) in sims.into_iter().zip(values) {
            let ret = sim.root_return(v);
            let edge = &mut self.root.edges[e];
            edge.backup(ret);
            edge.virtual_losses -= 1;
            self.root.n += 1;
            self.completed += 1;
            // The player acting first after the root is the root's opponent.
            self.adapt(sim.steps, -ret)?;
        }
        Ok(())
    }

    fn completed(&self) -> u32 {
        self.completed
    }

    fn pending_virtual_losses(&self) -> u64 {
        self.root.pending_virtual_losses()
    }

    fn result(&self) -> SearchResult {
        SearchResult::from_root(self.root_state.size(), &self.root)
    }
}
