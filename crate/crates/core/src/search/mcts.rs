//! Tree search with PUCT at every node.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hex::GameState;
use crate::Scalar;

use super::eval::Evaluator;
use super::puct::{PuctParams, TreeNode, TERMINAL, UNEXPANDED};
use super::{root_node, SearchConfig, SearchError, SearchResult, Searcher};

#[allow(clippy::large_enum_variant)]
enum Leaf {
    Terminal,
    Pending(GameState),
}

struct Path {
    /// `(node, edge)` pairs from the root down.
    edges: Vec<(usize, usize)>,
    leaf: Leaf,
}

pub struct Mcts<'a, 'n, T: Scalar> {
    eval: &'a mut Evaluator<'n, T>,
    params: PuctParams,
    root_state: GameState,
    nodes: Vec<TreeNode>,
    completed: u32,
}

impl<'a, 'n, T: Scalar> Mcts<'a, 'n, T> {
    pub fn new(
        eval: &'a mut Evaluator<'n, T>,
        state: &GameState,
        config: &SearchConfig,
    ) -> Result<Self, SearchError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let root = root_node(eval, state, config, &mut rng)?;
        Ok(Mcts {
            eval,
            params: config.puct_params(),
            root_state: *state,
            nodes: vec![root],
            completed: 0,
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    fn select_path(&mut self) -> Result<Path, SearchError> {
        let mut node = 0;
        let mut state = self.root_state;
        let mut edges = Vec::new();
        loop {
            let e = self.nodes[node].puct_select(&self.params);
            let current = &mut self.nodes[node];
            current.edges[e].virtual_losses += 1;
            edges.push((node, e));
            state.play(current.actions[e])?;
            match current.children[e] {
                TERMINAL => {
                    return Ok(Path {
                        edges,
                        leaf: Leaf::Terminal,
                    })
                }
                UNEXPANDED if state.is_terminal() => {
                    current.children[e] = TERMINAL;
                    return Ok(Path {
                        edges,
                        leaf: Leaf::Terminal,
                    });
                }
                UNEXPANDED => {
                    return Ok(Path {
                        edges,
                        leaf: Leaf::Pending(state),
                    })
                }
                child => node = child as usize,
            }
        }
    }

    /// Evaluates a leaf, expanding it unless an earlier path of the same
    /// batch already did. Returns the value for the leaf's player to move.
    fn evaluate_leaf(&mut self, path: &Path) -> Result<f64, SearchError> {
        match &path.leaf {
            Leaf::Terminal => Ok(-1.0),
            Leaf::Pending(state) => {
                let (parent, e) = *path.edges.last().expect("non-empty path");
                if self.nodes[parent].children[e] == UNEXPANDED {
                    let (actions, prior, value) = self.eval.evaluate(state)?;
                    self.nodes.push(TreeNode::new(actions, prior, 1));
                    self.nodes[parent].children[e] = (self.nodes.len() - 1) as u32;
                    Ok(value)
                } else {
                    Ok(self.eval.value(state)?)
                }
            }
        }
    }

    fn backup(&mut self, path: &Path, leaf_value: f64) {
        let mut v = -leaf_value;
        for &(node, e) in path.edges.iter().rev() {
            let n = &mut self.nodes[node];
            n.edges[e].backup(v);
            n.edges[e].virtual_losses -= 1;
            n.n += 1;
            v = -v;
        }
    }
}

impl<T: Scalar> Searcher for Mcts<'_, '_, T> {
    fn run_batch(&mut self, batch_size: usize) -> Result<(), SearchError> {
        let mut paths = Vec::with_capacity(batch_size);
        for _ in 0..batch_size {
            paths.push(self.select_path()?);
        }
        let mut values = Vec::with_capacity(batch_size);
        for path in &paths {
            values.push(self.evaluate_leaf(path)?);
        }
        for (path, v) in paths.iter().zip(values) {
            self.backup(path, v);
            self.completed += 1;
        }
        Ok(())
    }

    fn completed(&self) -> u32 {
        self.completed
    }

    fn pending_virtual_losses(&self) -> u64 {
        self.nodes
            .iter()
            .map(TreeNode::pending_virtual_losses)
            .sum()
    }

    fn result(&self) -> SearchResult {
        SearchResult::from_root(self.root_state.size(), &self.nodes[0])
    }
}
