//! Finite measured trees and leaf-constant functions on them.
//!
//! A [`Tree`] is a finite model of a nested family of sets over a probability
//! space: the root has measure 1, every internal node splits into at least two
//! children whose measures add up to the parent's, and every node has positive
//! measure. Node ids are assigned so that a parent always precedes its
//! children, which lets bottom-up passes run as a plain reverse iteration.

mod quotient;
mod random;

pub use quotient::{
    build_s_alpha, ExplicitExpansion, LeafRole, QuotientNode, QuotientTree, RankLevel,
};
pub use random::{build_random_tree, RandomTreeConfig, SplitLaw};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Default limit on the number of nodes any single construction may allocate.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 22;

/// Relative tolerance for the children-sum-to-parent invariant.
pub const MEASURE_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    measure: f64,
    depth: u32,
}

impl Node {
    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    leaves: Vec<NodeId>,
    // position of each node in `leaves`, usize::MAX for internal nodes
    leaf_pos: Vec<usize>,
}

impl Tree {
    pub const ROOT: NodeId = 0;

    /// Builds a tree from a parent table and per-node measures.
    ///
    /// `parents[0]` must be `None` and every other entry must point to a
    /// smaller id. All tree invariants are checked.
    pub fn from_parents(parents: &[Option<NodeId>], measures: &[f64]) -> Result<Self> {
        if parents.is_empty() {
            return Err(Error::argument("a tree needs at least a root"));
        }
        if parents.len() != measures.len() {
            return Err(Error::argument(format!(
                "{} parents but {} measures",
                parents.len(),
                measures.len()
            )));
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(parents.len());
        for (id, (&parent, &measure)) in parents.iter().zip(measures).enumerate() {
            let depth = match (id, parent) {
                (0, None) => 0,
                (0, Some(_)) => return Err(Error::argument("node 0 must be the root")),
                (_, None) => return Err(Error::argument(format!("node {id} has no parent"))),
                (_, Some(p)) if p >= id => {
                    return Err(Error::argument(format!(
                        "node {id} has parent {p}; parents must precede children"
                    )))
                }
                (_, Some(p)) => nodes[p].depth + 1,
            };
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            nodes.push(Node {
                parent,
                children: Vec::new(),
                measure,
                depth,
            });
        }
        let tree = Self::assemble(nodes);
        tree.validate()?;
        Ok(tree)
    }

    fn assemble(nodes: Vec<Node>) -> Self {
        let mut leaf_pos = vec![usize::MAX; nodes.len()];
        let mut leaves = Vec::new();
        for (id, node) in nodes.iter().enumerate() {
            if node.is_leaf() {
                leaf_pos[id] = leaves.len();
                leaves.push(id);
            }
        }
        Tree {
            nodes,
            leaves,
            leaf_pos,
        }
    }

    /// Homogeneous k-adic tree of the given depth, using the default budget.
    pub fn kadic(k: usize, depth: u32) -> Result<Self> {
        build_kadic(k, depth, DEFAULT_NODE_BUDGET)
    }

    /// Checks every structural and measure invariant.
    pub fn validate(&self) -> Result<()> {
        let root = &self.nodes[Self::ROOT];
        if root.parent.is_some() {
            return Err(Error::argument("root has a parent"));
        }
        if (root.measure - 1.0).abs() > MEASURE_TOLERANCE {
            return Err(Error::argument(format!(
                "root measure is {}, expected 1",
                root.measure
            )));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if !(node.measure > 0.0) || !node.measure.is_finite() {
                return Err(Error::argument(format!(
                    "node {id} has non-positive measure {}",
                    node.measure
                )));
            }
            if let Some(p) = node.parent {
                if node.depth != self.nodes[p].depth + 1 {
                    return Err(Error::argument(format!("node {id} has inconsistent depth")));
                }
            }
            match node.children.len() {
                0 => {}
                1 => {
                    return Err(Error::argument(format!(
                        "internal node {id} has a single child"
                    )))
                }
                _ => {
                    let sum: f64 = node.children.iter().map(|&c| self.nodes[c].measure).sum();
                    if (sum - node.measure).abs() > MEASURE_TOLERANCE * node.measure {
                        return Err(Error::argument(format!(
                            "children of node {id} sum to {sum}, node measure is {}",
                            node.measure
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::argument(format!("node {id} does not belong to this tree")))
    }

    pub fn measure(&self, id: NodeId) -> f64 {
        self.nodes[id].measure
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn depth(&self, id: NodeId) -> u32 {
        self.nodes[id].depth
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Leaf ids in increasing id order. Step functions are indexed the same way.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Position of `id` among the leaves, or `None` for internal nodes.
    pub fn leaf_position(&self, id: NodeId) -> Option<usize> {
        self.leaf_pos.get(id).copied().filter(|&p| p != usize::MAX)
    }

    /// Iterator from `id` up to the root, both included.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(id), move |&n| self.nodes[n].parent)
    }

    /// True if `inner` is `outer` or one of its descendants.
    pub fn contains(&self, outer: NodeId, inner: NodeId) -> bool {
        self.ancestors(inner).any(|a| a == outer)
    }

    /// Leaves of the subtree rooted at `id`, in depth-first order.
    pub fn subtree_leaves(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.is_leaf() {
                out.push(n);
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    /// Largest leaf measure; a proxy for how finely the tree resolves the space.
    pub fn max_leaf_measure(&self) -> f64 {
        self.leaves
            .iter()
            .map(|&l| self.nodes[l].measure)
            .fold(0.0, f64::max)
    }
}

/// Homogeneous tree where every node at depth `d < depth` has `k` children of
/// measure `k^-d` each.
pub fn build_kadic(k: usize, depth: u32, node_budget: usize) -> Result<Tree> {
    if k < 2 {
        return Err(Error::argument(format!(
            "k-adic trees need k >= 2, got {k}"
        )));
    }
    if depth < 1 {
        return Err(Error::argument("k-adic trees need depth >= 1"));
    }
    let needed = kadic_node_count(k as u128, depth).unwrap_or(u128::MAX);
    if needed > node_budget as u128 {
        return Err(Error::Resource {
            what: "k-adic tree nodes",
            needed,
            limit: node_budget as u128,
        });
    }
    let mut nodes = Vec::with_capacity(needed as usize);
    nodes.push(Node {
        parent: None,
        children: Vec::new(),
        measure: 1.0,
        depth: 0,
    });
    // breadth-first: each level is a contiguous id range
    let mut level = 0..1;
    for d in 1..=depth {
        let start = nodes.len();
        for parent in level.clone() {
            let measure = nodes[parent].measure / k as f64;
            for _ in 0..k {
                let id = nodes.len();
                nodes[parent].children.push(id);
                nodes.push(Node {
                    parent: Some(parent),
                    children: Vec::new(),
                    measure,
                    depth: d,
                });
            }
        }
        level = start..nodes.len();
    }
    Ok(Tree::assemble(nodes))
}

fn kadic_node_count(k: u128, depth: u32) -> Option<u128> {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(k)?;
    }
    Some(total)
}

/// A nonnegative function that is constant on every leaf of a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<'t> {
    tree: &'t Tree,
    values: Vec<f64>,
}

impl<'t> StepFunction<'t> {
    /// `values[i]` is the value on `tree.leaves()[i]`.
    pub fn new(tree: &'t Tree, values: Vec<f64>) -> Result<Self> {
        if values.len() != tree.leaf_count() {
            return Err(Error::argument(format!(
                "expected {} leaf values, got {}",
                tree.leaf_count(),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::argument(format!(
                "leaf value {v} at position {i} is not a finite nonnegative number"
            )));
        }
        Ok(StepFunction { tree, values })
    }

    pub fn constant(tree: &'t Tree, c: f64) -> Result<Self> {
        Self::new(tree, vec![c; tree.leaf_count()])
    }

    pub fn from_fn(tree: &'t Tree, mut f: impl FnMut(NodeId) -> f64) -> Result<Self> {
        let values = tree.leaves().iter().map(|&l| f(l)).collect();
        Self::new(tree, values)
    }

    pub fn tree(&self) -> &'t Tree {
        self.tree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value_at(&self, leaf: NodeId) -> Result<f64> {
        self.tree
            .leaf_position(leaf)
            .map(|p| self.values[p])
            .ok_or_else(|| Error::argument(format!("node {leaf} is not a leaf of this tree")))
    }

    /// Pairs of (leaf measure, value).
    pub fn weighted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.tree
            .leaves()
            .iter()
            .zip(&self.values)
            .map(|(&l, &v)| (self.tree.measure(l), v))
    }

    /// `∫ φ`.
    pub fn integral(&self) -> f64 {
        self.weighted().map(|(m, v)| m * v).sum()
    }

    /// `∫ φ^r` for `r > 0`.
    pub fn integral_power(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::argument(format!(
                "exponent must be positive, got {r}"
            )));
        }
        Ok(self.weighted().map(|(m, v)| m * v.powf(r)).sum())
    }

    /// `∫_I φ` for every node, in one bottom-up pass.
    pub fn node_integrals(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.tree.len()];
        for (&leaf, &v) in self.tree.leaves().iter().zip(&self.values) {
            acc[leaf] = self.tree.measure(leaf) * v;
        }
        for id in (1..self.tree.len()).rev() {
            let parent = self.tree.nodes[id]
                .parent
                .expect("non-root node has a parent");
            acc[parent] += acc[id];
        }
        acc
    }

    /// Average of φ over every node.
    pub fn node_averages(&self) -> Vec<f64> {
        let mut out = self.node_integrals();
        for (id, v) in out.iter_mut().enumerate() {
            if self.tree.nodes[id].is_leaf() {
                // exact leaf value rather than (μ·v)/μ
                *v = self.values[self.tree.leaf_pos[id]];
            } else {
                *v /= self.tree.nodes[id].measure;
            }
        }
        out
    }

    /// Average of φ over a single node.
    pub fn node_average(&self, node: NodeId) -> Result<f64> {
        let n = self.tree.node(node)?;
        if n.is_leaf() {
            return self.value_at(node);
        }
        let integral: f64 = self
            .tree
            .subtree_leaves(node)
            .into_iter()
            .map(|l| self.tree.measure(l) * self.values[self.tree.leaf_pos[l]])
            .sum();
        Ok(integral / n.measure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_depth_one() {
        let t = Tree::kadic(2, 1).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.leaf_count(), 2);
        for &l in t.leaves() {
            assert_eq!(t.measure(l), 0.5);
        }
    }

    #[test]
    fn triadic_depth_two() {
        let t = Tree::kadic(3, 2).unwrap();
        assert_eq!(t.leaf_count(), 9);
        for &l in t.leaves() {
            assert!((t.measure(l) - 1.0 / 9.0).abs() < 1e-16);
            assert_eq!(t.depth(l), 2);
        }
        t.validate().unwrap();
    }

    #[test]
    fn kadic_budget_guard() {
        match Tree::kadic(2, 30) {
            Err(Error::Resource { limit, .. }) => assert_eq!(limit, DEFAULT_NODE_BUDGET as u128),
            other => panic!("expected resource error, got {other:?}"),
        }
        assert!(matches!(
            build_kadic(2, 3, 14),
            Err(Error::Resource { needed: 15, .. })
        ));
        assert!(build_kadic(2, 3, 15).is_ok());
    }

    #[test]
    fn kadic_rejects_bad_arguments() {
        assert!(matches!(Tree::kadic(1, 3), Err(Error::Argument(_))));
        assert!(matches!(Tree::kadic(2, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn from_parents_checks_invariants() {
        let ok = Tree::from_parents(&[None, Some(0), Some(0)], &[1.0, 0.25, 0.75]).unwrap();
        assert_eq!(ok.leaves(), &[1, 2]);
        // single child
        assert!(Tree::from_parents(&[None, Some(0)], &[1.0, 1.0]).is_err());
        // measures don't add up
        assert!(Tree::from_parents(&[None, Some(0), Some(0)], &[1.0, 0.25, 0.7]).is_err());
        // zero measure
        assert!(Tree::from_parents(&[None, Some(0), Some(0)], &[1.0, 0.0, 1.0]).is_err());
        // root not of mass one
        assert!(Tree::from_parents(&[None, Some(0), Some(0)], &[0.5, 0.25, 0.25]).is_err());
        // parent after child
        assert!(Tree::from_parents(&[None, Some(2), Some(0)], &[1.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn constant_function_averages() {
        let t = Tree::kadic(3, 3).unwrap();
        let phi = StepFunction::constant(&t, 2.5).unwrap();
        for v in phi.node_averages() {
            assert!((v - 2.5).abs() < 1e-15);
        }
        assert!((phi.node_average(4).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn root_average_binary() {
        let t = Tree::kadic(2, 1).unwrap();
        let phi = StepFunction::new(&t, vec![0.0, 2.0]).unwrap();
        assert_eq!(phi.node_average(Tree::ROOT).unwrap(), 1.0);
        assert_eq!(phi.node_average(2).unwrap(), 2.0);
        assert!(matches!(phi.node_average(3), Err(Error::Argument(_))));
    }

    #[test]
    fn integral_power_values() {
        let t = Tree::kadic(2, 1).unwrap();
        let one = StepFunction::constant(&t, 1.0).unwrap();
        for r in [0.5, 1.0, 2.0, 7.3] {
            assert_eq!(one.integral_power(r).unwrap(), 1.0);
        }
        let phi = StepFunction::new(&t, vec![1.0, 3.0]).unwrap();
        assert_eq!(phi.integral_power(2.0).unwrap(), 5.0);
        assert_eq!(
            phi.integral_power(1.0).unwrap(),
            phi.node_average(Tree::ROOT).unwrap()
        );
        assert!(phi.integral_power(0.0).is_err());
        assert!(phi.integral_power(-1.0).is_err());
    }

    #[test]
    fn step_function_validation() {
        let t = Tree::kadic(2, 1).unwrap();
        assert!(StepFunction::new(&t, vec![1.0]).is_err());
        assert!(StepFunction::new(&t, vec![1.0, -0.1]).is_err());
        assert!(StepFunction::new(&t, vec![1.0, f64::NAN]).is_err());
    }
}
