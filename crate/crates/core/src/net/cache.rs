use std::collections::HashMap;
use std::sync::Arc;

use crate::hex::{encode, GameState, PositionKey};
use crate::Scalar;

use super::forward::TrunkFeatures;
use super::params::PolicyValueNet;

const DEFAULT_BUDGET_BYTES: usize = 64 << 20;

/// Trunk activations keyed by position. Transpositions share an entry, and a
/// hit performs no trunk arithmetic. Valid only while the trunk is frozen.
#[derive(Debug)]
pub struct FeatureCache<T> {
    map: HashMap<PositionKey, Arc<TrunkFeatures<T>>>,
    capacity: usize,
    trunk_evals: u64,
    hits: u64,
}

impl<T: Scalar> FeatureCache<T> {
    /// Cache sized to roughly 64 MiB of features for `net`.
    pub fn for_net(net: &PolicyValueNet<T>) -> Self {
        let entry = net.config.channels * net.config.cells() * std::mem::size_of::<T>();
        Self::with_capacity((DEFAULT_BUDGET_BYTES / entry.max(1)).max(1))
    }

    pub fn with_capacity(capacity: usize) -> Self {
        FeatureCache {
            map: HashMap::new(),
            capacity,
            trunk_evals: 0,
            hits: 0,
        }
    }

    pub fn features(
        &mut self,
        net: &PolicyValueNet<T>,
        state: &GameState,
    ) -> Arc<TrunkFeatures<T>> {
        let key = state.key();
        if let Some(f) = self.map.get(&key) {
            self.hits += 1;
            return Arc::clone(f);
        }
        if self.map.len() >= self.capacity {
            self.map.clear();
        }
        self.trunk_evals += 1;
        let f = Arc::new(net.trunk_forward(&encode(state)));
        self.map.insert(key, Arc::clone(&f));
        f
    }

    pub fn contains(&self, state: &GameState) -> bool {
        self.map.contains_key(&state.key())
    }

    /// Number of trunk forward passes performed so far.
    pub fn trunk_evals(&self) -> u64 {
        self.trunk_evals
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn clear(&mut self) {
        self.map.clear();
    }
}
