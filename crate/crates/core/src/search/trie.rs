//! Unique-sequence truncation for root-bandit simulations.

use std::collections::HashMap;

use crate::hex::{Action, GameState, HexError};

const ROOT: u32 = 0;

/// The set of action-sequence prefixes seen by earlier simulations. Stores
/// no statistics.
#[derive(Clone, Debug, Default)]
pub struct SequenceTrie {
    children: HashMap<(u32, u16), u32>,
}

impl SequenceTrie {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct non-empty prefixes.
    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn contains(&self, sequence: &[Action]) -> bool {
        let mut node = ROOT;
        for a in sequence {
            match self.children.get(&(node, a.0)) {
                Some(&c) => node = c,
                None => return false,
            }
        }
        true
    }

    /// Descends one edge, creating it if needed. Returns the child and
    /// whether it already existed.
    fn step(&mut self, node: u32, action: Action) -> (u32, bool) {
        let next = self.children.len() as u32 + 1;
        match self.children.entry((node, action.0)) {
            std::collections::hash_map::Entry::Occupied(e) => (*e.get(), true),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(next);
                (next, false)
            }
        }
    }
}

/// A finished simulation.
#[derive(Clone, Debug)]
pub struct Simulation<S> {
    /// Every action from the root, including the bandit-chosen first one.
    pub actions: Vec<Action>,
    /// Sampler output for each action after the first.
    pub steps: Vec<S>,
    pub leaf: GameState,
}

impl<S> Simulation<S> {
    /// Leaf value as seen by the player to move at the root, given `value`
    /// from the perspective of the leaf's player to move.
    pub fn root_return(&self, value: f64) -> f64 {
        if self.actions.len().is_multiple_of(2) {
            value
        } else {
            -value
        }
    }
}

/// Plays `first` from `root`, then samples actions until the action sequence
/// leaves the trie or the game ends. The sequence is inserted into the trie.
pub fn simulate_until_unique<S, E, F>(
    trie: &mut SequenceTrie,
    root: &GameState,
    first: Action,
    mut sample: F,
) -> Result<Simulation<S>, E>
where
    F: FnMut(&GameState) -> Result<(Action, S), E>,
    E: From<HexError>,
{
    let mut state = root.apply_move(first)?;
    let mut actions = vec![first];
    let mut steps = Vec::new();
    let (mut node, mut seen) = trie.step(ROOT, first);
    while seen && !state.is_terminal() {
        let (action, step) = sample(&state)?;
        state.play(action)?;
        actions.push(action);
        steps.push(step);
        (node, seen) = trie.step(node, action);
    }
    Ok(Simulation {
        actions,
        steps,
        leaf: state,
    })
}
