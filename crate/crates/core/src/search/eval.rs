//! Position evaluation in the board's own frame on top of the feature cache.

use std::sync::Arc;

use rand::Rng;

use crate::hex::{canonical_action, canonical_index, canonical_mask, Action, GameState};
use crate::net::{
    policy_head_forward, FeatureCache, NetError, PolicyHead, PolicyValueNet, TrunkFeatures,
};
use crate::Scalar;

/// A frozen network plus its trunk-feature cache. Keep one per game (or
/// longer) so transpositions and revisited positions cost nothing.
pub struct Evaluator<'n, T: Scalar> {
    net: &'n PolicyValueNet<T>,
    cache: FeatureCache<T>,
    evaluations: u64,
}

impl<'n, T: Scalar> Evaluator<'n, T> {
    pub fn new(net: &'n PolicyValueNet<T>) -> Self {
        Evaluator {
            net,
            cache: FeatureCache::for_net(net),
            evaluations: 0,
        }
    }

    pub fn net(&self) -> &'n PolicyValueNet<T> {
        self.net
    }

    pub fn cache(&self) -> &FeatureCache<T> {
        &self.cache
    }

    /// Leaf and root evaluations requested so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn features(&mut self, state: &GameState) -> Arc<TrunkFeatures<T>> {
        self.cache.features(self.net, state)
    }

    /// Prior over `state.legal_moves()` (same order) and the value for the
    /// player to move.
    pub fn evaluate(
        &mut self,
        state: &GameState,
    ) -> Result<(Vec<Action>, Vec<f64>, f64), NetError> {
        self.evaluations += 1;
        let features = self.features(state);
        let mask = canonical_mask(state);
        let policy = policy_head_forward(&features, &self.net.policy, &mask)?;
        let actions = state.legal_moves();
        let prior = actions
            .iter()
            .map(|&a| policy[canonical_action(state, a)].as_f64())
            .collect();
        let value = self.net.value_from_features(&features).as_f64();
        if !value.is_finite() {
            return Err(NetError::NonFinite("value"));
        }
        Ok((actions, prior, value))
    }

    pub fn value(&mut self, state: &GameState) -> Result<f64, NetError> {
        self.evaluations += 1;
        let features = self.features(state);
        let value = self.net.value_from_features(&features).as_f64();
        if !value.is_finite() {
            return Err(NetError::NonFinite("value"));
        }
        Ok(value)
    }

    /// Raw-network move: the most probable legal action.
    pub fn best_action(&mut self, state: &GameState) -> Result<Action, NetError> {
        let (actions, prior, _) = self.evaluate(state)?;
        let mut best = 0;
        for i in 1..prior.len() {
            if prior[i] > prior[best] {
                best = i;
            }
        }
        Ok(actions[best])
    }
}

/// Draws a canonical index from `probs`; returns the action in the real frame.
pub(crate) fn sample_canonical<T: Scalar>(
    state: &GameState,
    probs: &[T],
    rng: &mut impl Rng,
) -> Action {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (i, &p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(i);
        if u < acc {
            break;
        }
    }
    let index = last.expect("some action has positive probability");
    Action(canonical_index(state.to_move(), index, state.size()) as u16)
}

/// Samples a move from `head` over cached features of `state`, returning the
/// action together with its canonical index, mask and features.
pub(crate) fn sample_from_head<T: Scalar>(
    features: &TrunkFeatures<T>,
    head: &PolicyHead<T>,
    state: &GameState,
    rng: &mut impl Rng,
) -> Result<(Action, Vec<bool>), NetError> {
    let mask = canonical_mask(state);
    let probs = policy_head_forward(features, head, &mask)?;
    Ok((sample_canonical(state, &probs, rng), mask))
}
