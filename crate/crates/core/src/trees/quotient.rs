//! Compressed representation of a selected subfamily of a k-adic tree.
//!
//! Every selected node `I` of rank `m` keeps `k - j` of its `k` children as
//! selected nodes of rank `m + 1`; the remaining `j` children form its atom,
//! of measure `(j/k)·μ(I)`. All selected nodes of one rank are congruent, so
//! the family is stored one [`RankLevel`] per rank. Ranks `0..max_rank` carry
//! atoms; the rank-`max_rank` nodes are closed off and their total measure is
//! kept as an explicit tail.

use super::{Node, NodeId, Tree, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankLevel {
    pub rank: usize,
    /// `ln` of the number of selected nodes at this rank, `rank·ln(k-j)`.
    pub node_count_ln: f64,
    /// `ln` of each node's measure, `-rank·ln(k)`.
    pub node_measure_ln: f64,
    /// Total measure of the selected nodes at this rank, `(1-α)^rank`.
    pub mass: f64,
    /// Total atom measure at this rank, `α·mass`; zero on the tail rank.
    pub atom_mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuotientTree {
    k: usize,
    j: usize,
    max_rank: usize,
    levels: Vec<RankLevel>,
    tail_mass: f64,
}

/// One selected node in an explicit enumeration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub rank: usize,
    pub measure: f64,
    /// Zero for nodes on the tail rank.
    pub atom_measure: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafRole {
    /// Leaf inside the atom of a selected node of the given rank.
    Atom { rank: usize },
    /// A closed-off selected node on the tail rank.
    Tail { rank: usize },
}

/// The quotient tree written out as an ordinary [`Tree`].
#[derive(Clone, Debug)]
pub struct ExplicitExpansion {
    pub tree: Tree,
    /// Role of each leaf, indexed like `tree.leaves()`.
    pub roles: Vec<LeafRole>,
    /// Rank of every node that is a selected node, `None` for atom leaves.
    pub selected_rank: Vec<Option<usize>>,
}

impl QuotientTree {
    /// Builds the family for `α = j/k` down to rank `max_rank`.
    pub fn build(k: usize, j: usize, max_rank: usize) -> Result<Self> {
        Self::build_with_budget(k, j, max_rank, DEFAULT_NODE_BUDGET)
    }

    pub fn build_with_budget(k: usize, j: usize, max_rank: usize, budget: usize) -> Result<Self> {
        if k < 2 || j < 1 || j >= k {
            return Err(Error::argument(format!(
                "need 1 <= j < k with k >= 2, got k={k}, j={j}"
            )));
        }
        if max_rank + 1 > budget {
            return Err(Error::Resource {
                what: "quotient tree ranks",
                needed: max_rank as u128 + 1,
                limit: budget as u128,
            });
        }
        let keep = (k - j) as f64;
        let kf = k as f64;
        let alpha = j as f64 / kf;
        // exp(m·ln(1-α)) keeps the relative error flat in m, unlike a running
        // product whose error grows linearly over many thousands of ranks
        let shrink_ln = (-alpha).ln_1p();
        let levels = (0..=max_rank)
            .map(|rank| {
                let mass = (rank as f64 * shrink_ln).exp();
                RankLevel {
                    rank,
                    node_count_ln: rank as f64 * keep.ln(),
                    node_measure_ln: -(rank as f64) * kf.ln(),
                    mass,
                    atom_mass: if rank < max_rank { alpha * mass } else { 0.0 },
                }
            })
            .collect::<Vec<_>>();
        let tail_mass = levels[max_rank].mass;
        Ok(QuotientTree {
            k,
            j,
            max_rank,
            levels,
            tail_mass,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn alpha(&self) -> f64 {
        self.j as f64 / self.k as f64
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    pub fn levels(&self) -> &[RankLevel] {
        &self.levels
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn atom_mass_total(&self) -> f64 {
        self.levels.iter().map(|l| l.atom_mass).sum()
    }

    /// Exact number of selected nodes at `rank`, if it fits in a `u128`.
    pub fn node_count(&self, rank: usize) -> Option<u128> {
        ((self.k - self.j) as u128).checked_pow(u32::try_from(rank).ok()?)
    }

    /// Measure of a single selected node at `rank` (may underflow to zero).
    pub fn node_measure(&self, rank: usize) -> f64 {
        (self.k as f64).powi(-(rank as i32))
    }

    fn expansion_size(&self) -> Option<u128> {
        // root + k children under every selected node above the tail rank
        let mut total: u128 = 1;
        for rank in 0..self.max_rank {
            total = total.checked_add(self.node_count(rank)?.checked_mul(self.k as u128)?)?;
        }
        Some(total)
    }

    fn check_expansion(&self, budget: usize) -> Result<()> {
        let needed = self.expansion_size().unwrap_or(u128::MAX);
        if needed > budget as u128 {
            return Err(Error::Resource {
                what: "explicit quotient expansion nodes",
                needed,
                limit: budget as u128,
            });
        }
        Ok(())
    }

    /// Lists every selected node with its parent, rank and atom measure.
    pub fn explicit_nodes(&self, budget: usize) -> Result<Vec<QuotientNode>> {
        self.check_expansion(budget)?;
        let keep = self.k - self.j;
        let mut out = vec![QuotientNode {
            id: 0,
            parent: None,
            rank: 0,
            measure: 1.0,
            atom_measure: if self.max_rank > 0 { self.alpha() } else { 0.0 },
        }];
        let mut cursor = 0;
        while cursor < out.len() {
            let node = out[cursor];
            if node.rank < self.max_rank {
                let rank = node.rank + 1;
                let measure = node.measure / self.k as f64;
                for _ in 0..keep {
                    let atom_measure = if rank < self.max_rank {
                        measure * self.j as f64 / self.k as f64
                    } else {
                        0.0
                    };
                    out.push(QuotientNode {
                        id: out.len(),
                        parent: Some(node.id),
                        rank,
                        measure,
                        atom_measure,
                    });
                }
            }
            cursor += 1;
        }
        Ok(out)
    }

    /// Writes the family out as a tree: a selected node of rank below the
    /// tail has `k - j` selected children followed by `j` atom leaves; tail
    /// nodes are leaves.
    pub fn expand(&self, budget: usize) -> Result<ExplicitExpansion> {
        self.check_expansion(budget)?;
        let keep = self.k - self.j;
        let mut nodes = vec![Node {
            parent: None,
            children: Vec::new(),
            measure: 1.0,
            depth: 0,
        }];
        let mut selected_rank: Vec<Option<usize>> = vec![Some(0)];
        let mut atom_rank: Vec<Option<usize>> = vec![None];
        let mut cursor: NodeId = 0;
        while cursor < nodes.len() {
            if let Some(rank) = selected_rank[cursor] {
                if rank < self.max_rank {
                    let measure = nodes[cursor].measure / self.k as f64;
                    let depth = nodes[cursor].depth + 1;
                    for c in 0..self.k {
                        let id = nodes.len();
                        nodes[cursor].children.push(id);
                        nodes.push(Node {
                            parent: Some(cursor),
                            children: Vec::new(),
                            measure,
                            depth,
                        });
                        if c < keep {
                            selected_rank.push(Some(rank + 1));
                            atom_rank.push(None);
                        } else {
                            selected_rank.push(None);
                            atom_rank.push(Some(rank));
                        }
                    }
                }
            }
            cursor += 1;
        }
        let tree = Tree::assemble(nodes);
        let roles = tree
            .leaves()
            .iter()
            .map(|&l| match (atom_rank[l], selected_rank[l]) {
                (Some(rank), _) => LeafRole::Atom { rank },
                (None, Some(rank)) => LeafRole::Tail { rank },
                (None, None) => unreachable!("every leaf is an atom leaf or a tail node"),
            })
            .collect();
        Ok(ExplicitExpansion {
            tree,
            roles,
            selected_rank,
        })
    }
}

/// Convenience wrapper for [`QuotientTree::build`].
pub fn build_s_alpha(k: usize, j: usize, max_rank: usize) -> Result<QuotientTree> {
    QuotientTree::build(k, j, max_rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_half_three_ranks() {
        let s = QuotientTree::build(2, 1, 3).unwrap();
        let counts: Vec<_> = (0..=3).map(|r| s.node_count(r).unwrap()).collect();
        assert_eq!(counts, vec![1, 1, 1, 1]);
        let atoms: Vec<_> = s.levels().iter().map(|l| l.atom_mass).collect();
        for (a, e) in atoms.iter().zip([0.5, 0.25, 0.125, 0.0]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!((s.tail_mass() - 0.125).abs() < 1e-15);
        assert!((s.atom_mass_total() + s.tail_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadric_rank_masses() {
        let s = QuotientTree::build(4, 1, 2).unwrap();
        for l in s.levels() {
            assert!((l.mass - 0.75f64.powi(l.rank as i32)).abs() < 1e-15);
        }
        assert_eq!(s.node_count(2), Some(9));
    }

    #[test]
    fn deep_ranks_keep_relative_accuracy() {
        let s = QuotientTree::build(1024, 1, 150_000).unwrap();
        let exact = (150_000.0 * (-1.0f64 / 1024.0).ln_1p()).exp();
        assert!((s.tail_mass() / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn conservation_for_many_builds() {
        for k in 2..9 {
            for j in 1..k {
                for m in [0, 1, 5, 40] {
                    let s = QuotientTree::build(k, j, m).unwrap();
                    let total = s.atom_mass_total() + s.tail_mass();
                    assert!((total - 1.0).abs() < 1e-12, "k={k} j={j} M={m}: {total}");
                }
            }
        }
    }

    #[test]
    fn explicit_nodes_match_levels() {
        let s = QuotientTree::build(3, 1, 3).unwrap();
        let nodes = s.explicit_nodes(1000).unwrap();
        assert_eq!(nodes.len(), 1 + 2 + 4 + 8);
        for n in &nodes {
            let children_mass: f64 = nodes
                .iter()
                .filter(|c| c.parent == Some(n.id))
                .map(|c| c.measure)
                .sum();
            if n.rank < 3 {
                assert!((n.atom_measure - (n.measure - children_mass)).abs() < 1e-15);
                assert!(n.atom_measure > 0.0);
            }
            let parent_rank = n.parent.map(|p| nodes[p].rank + 1).unwrap_or(0);
            assert_eq!(n.rank, parent_rank);
        }
    }

    #[test]
    fn expansion_is_a_valid_tree() {
        let s = QuotientTree::build(2, 1, 4).unwrap();
        let e = s.expand(1000).unwrap();
        e.tree.validate().unwrap();
        let tails = e
            .roles
            .iter()
            .filter(|r| matches!(r, LeafRole::Tail { .. }))
            .count();
        assert_eq!(tails, 1);
        assert_eq!(e.roles.len(), 5);
        assert!(matches!(s.expand(3), Err(Error::Resource { .. })));
    }

    #[test]
    fn argument_checks() {
        assert!(QuotientTree::build(2, 2, 3).is_err());
        assert!(QuotientTree::build(2, 0, 3).is_err());
        assert!(matches!(
            QuotientTree::build_with_budget(2, 1, 100, 50),
            Err(Error::Resource { .. })
        ));
    }
}
