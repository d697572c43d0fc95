use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;

use crate::hex::{canonical_index, canonical_mask, encode, GameRecord};
use crate::net::Sample;

use super::ExitError;

/// Encoded state, expert policy target (canonical frame) and outcome for the
/// player to move.
pub type TrainingExample = Sample<f32>;

/// Training examples of one game, one per searched state. Resigned games
/// also contribute the state in which the loser resigned.
pub fn training_examples(record: &GameRecord) -> Result<Vec<TrainingExample>, ExitError> {
    let policies = record
        .search_policies
        .as_ref()
        .ok_or_else(|| ExitError::Record("game has no search policies".into()))?;
    let winner = record.winner()?;
    let actions = record.actions()?;
    let expected = actions.len() + usize::from(record.resigned);
    if policies.len() != expected {
        return Err(ExitError::Record(format!(
            "{} search policies for {} searched states",
            policies.len(),
            expected
        )));
    }
    let n = record.board_size;
    let mut state = crate::hex::GameState::new(n)?;
    let mut out = Vec::with_capacity(policies.len());
    for (i, policy) in policies.iter().enumerate() {
        if policy.len() != n * n {
            return Err(ExitError::Record(format!(
                "policy {i} has {} entries",
                policy.len()
            )));
        }
        let legal = canonical_mask(&state);
        let mut target = vec![0.0f32; n * n];
        for (cell, &p) in policy.iter().enumerate() {
            if p != 0.0 {
                let c = canonical_index(state.to_move(), cell, n);
                if !legal[c] {
                    return Err(ExitError::Record(format!(
                        "policy {i} puts mass on an illegal cell"
                    )));
                }
                target[c] = p;
            }
        }
        out.push(TrainingExample {
            input: encode(&state),
            legal,
            target,
            outcome: if state.to_move() == winner { 1.0 } else { -1.0 },
        });
        if let Some(&a) = actions.get(i) {
            state.play(a)?;
        }
    }
    Ok(out)
}

/// Bounded FIFO of training examples; the oldest are evicted first.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    examples: VecDeque<TrainingExample>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        ReplayBuffer {
            examples: VecDeque::new(),
            capacity,
        }
    }

    pub fn push(&mut self, example: TrainingExample) {
        if self.examples.len() == self.capacity {
            self.examples.pop_front();
        }
        self.examples.push_back(example);
    }

    pub fn extend(&mut self, examples: impl IntoIterator<Item = TrainingExample>) {
        examples.into_iter().for_each(|e| self.push(e));
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> Option<&TrainingExample> {
        self.examples.get(i)
    }

    /// Uniform sample without replacement of `min(size, len)` examples.
    pub fn sample_batch(&self, size: usize, rng: &mut impl Rng) -> Vec<TrainingExample> {
        let size = size.min(self.len());
        sample(rng, self.len(), size)
            .into_iter()
            .map(|i| self.examples[i].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hex::{Action, Player};
    use rand::SeedableRng;

    fn example(tag: f32) -> TrainingExample {
        TrainingExample {
            input: vec![tag],
            legal: vec![true],
            target: vec![1.0],
            outcome: 1.0,
        }
    }

    #[test]
    fn eviction_is_fifo() {
        let mut b = ReplayBuffer::new(5);
        b.extend((0..8).map(|i| example(i as f32)));
        assert_eq!(b.len(), 5);
        let kept: Vec<f32> = (0..5).map(|i| b.get(i).unwrap().input[0]).collect();
        assert_eq!(kept, vec![3.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn batches_have_no_repeats() {
        let mut b = ReplayBuffer::new(100);
        b.extend((0..10).map(|i| example(i as f32)));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut tags: Vec<i32> = b
            .sample_batch(20, &mut rng)
            .iter()
            .map(|e| e.input[0] as i32)
            .collect();
        tags.sort();
        assert_eq!(tags, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn examples_alternate_outcome_and_respect_legality() {
        let moves = [Action(1), Action(0), Action(4), Action(3), Action(7)];
        let mut rec = GameRecord::new(3, &moves, Player::Black);
        let mut state = crate::hex::GameState::new(3).unwrap();
        let mut policies = Vec::new();
        for &a in &moves {
            let mut p = vec![0.0f32; 9];
            let legal = state.legal_moves();
            for &l in &legal {
                p[l.index()] = 1.0 / legal.len() as f32;
            }
            policies.push(p);
            state.play(a).unwrap();
        }
        rec.search_policies = Some(policies);
        let ex = training_examples(&rec).unwrap();
        assert_eq!(ex.len(), 5);
        let z: Vec<f32> = ex.iter().map(|e| e.outcome).collect();
        assert_eq!(z, vec![1.0, -1.0, 1.0, -1.0, 1.0]);
        for e in &ex {
            let total: f32 = e.target.iter().sum();
            assert!((total - 1.0).abs() < 1e-5);
            for (t, &l) in e.target.iter().zip(&e.legal) {
                assert!(l || *t == 0.0);
            }
        }
        rec.search_policies.as_mut().unwrap()[2][0] = 0.5;
        assert!(training_examples(&rec).is_err());
    }
}
