use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Node, NodeId, Tree, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};

/// How a node's measure is shared among its children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitLaw {
    /// Equal shares.
    Equal,
    /// Independent weights drawn from [0.2, 1], normalized.
    Uniform,
    /// One child takes most of the mass.
    Skewed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomTreeConfig {
    pub seed: u64,
    pub max_depth: u32,
    pub max_children: usize,
    pub split_law: SplitLaw,
    /// Probability that a non-root node above `max_depth` is split.
    pub split_probability: f64,
    pub node_budget: usize,
}

impl RandomTreeConfig {
    pub fn new(seed: u64, max_depth: u32, max_children: usize, split_law: SplitLaw) -> Self {
        RandomTreeConfig {
            seed,
            max_depth,
            max_children,
            split_law,
            split_probability: 0.8,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn build(&self) -> Result<Tree> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.build_with(&mut rng)
    }

    /// Builds a tree drawing from an existing generator.
    pub fn build_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Tree> {
        if self.max_children < 2 {
            return Err(Error::argument(format!(
                "max_children must be at least 2, got {}",
                self.max_children
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::argument("max_depth must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.split_probability) {
            return Err(Error::argument("split_probability must lie in [0, 1]"));
        }
        let mut nodes = vec![Node {
            parent: None,
            children: Vec::new(),
            measure: 1.0,
            depth: 0,
        }];
        let mut weights = Vec::with_capacity(self.max_children);
        // ids grow in breadth-first order, so a cursor over `nodes` is a queue
        let mut cursor: NodeId = 0;
        while cursor < nodes.len() {
            let depth = nodes[cursor].depth;
            let split = depth < self.max_depth
                && (cursor == Tree::ROOT || rng.random_bool(self.split_probability));
            if split {
                let n = rng.random_range(2..=self.max_children);
                if nodes.len() + n > self.node_budget {
                    return Err(Error::Resource {
                        what: "random tree nodes",
                        needed: (nodes.len() + n) as u128,
                        limit: self.node_budget as u128,
                    });
                }
                weights.clear();
                match self.split_law {
                    SplitLaw::Equal => weights.resize(n, 1.0),
                    SplitLaw::Uniform => {
                        weights.extend((0..n).map(|_| rng.random_range(0.2..=1.0)))
                    }
                    SplitLaw::Skewed => {
                        let heavy = rng.random_range(0..n);
                        weights.extend((0..n).map(|i| {
                            if i == heavy {
                                4.0 * n as f64
                            } else {
                                rng.random_range(0.2..=1.0)
                            }
                        }));
                    }
                }
                let total: f64 = weights.iter().sum();
                let parent_measure = nodes[cursor].measure;
                let mut assigned = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    // the last child takes the exact remainder
                    let measure = if i + 1 == n {
                        parent_measure - assigned
                    } else {
                        parent_measure * w / total
                    };
                    assigned += measure;
                    let id = nodes.len();
                    nodes[cursor].children.push(id);
                    nodes.push(Node {
                        parent: Some(cursor),
                        children: Vec::new(),
                        measure,
                        depth: depth + 1,
                    });
                }
            }
            cursor += 1;
        }
        let tree = Tree::assemble(nodes);
        tree.validate()?;
        Ok(tree)
    }
}

/// Deterministic random tree; see [`RandomTreeConfig`] for the generator.
pub fn build_random_tree(
    seed: u64,
    max_depth: u32,
    max_children: usize,
    split_law: SplitLaw,
) -> Result<Tree> {
    RandomTreeConfig::new(seed, max_depth, max_children, split_law).build()
}
