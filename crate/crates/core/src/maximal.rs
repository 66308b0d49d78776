//! The tree maximal operator and its linearization.
//!
//! For a leaf-constant `φ`, `M_T φ` on a leaf is the largest average of `φ`
//! over the chain of nodes containing that leaf. The linearization records,
//! for every leaf, the topmost node of the chain attaining that maximum; the
//! nodes selected this way (plus the root) partition the space into atoms on
//! which `M_T φ` is the constant average over the selecting node.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trees::{NodeId, StepFunction, Tree};

/// Relative tolerance used to decide that an ancestor's average attains the
/// chain maximum: `avg >= M - TIE_TOLERANCE·(1 + |M|)`.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `M_T φ` as a step function on the same tree.
pub fn maximal_function<'t>(phi: &StepFunction<'t>) -> StepFunction<'t> {
    let tree = phi.tree();
    let averages = phi.node_averages();
    let mut best = averages.clone();
    // parents precede children
    for id in 1..tree.len() {
        let parent = tree.parent(id).expect("non-root node has a parent");
        best[id] = best[id].max(best[parent]);
    }
    let values = tree.leaves().iter().map(|&l| best[l]).collect();
    StepFunction::new(tree, values).expect("maximum of nonnegative averages is nonnegative")
}

/// One selected node of a linearization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedNode {
    pub node: NodeId,
    /// Number of selected strict ancestors.
    pub rank: usize,
    pub measure: f64,
    /// Measure of the atom `A_I`.
    pub atom_measure: f64,
    /// `∫_{A_I} φ`.
    pub atom_integral: f64,
    /// `a_I^{-1/q'} ∫_{A_I} φ`, zero when the atom is empty.
    pub x: f64,
    /// Average of `φ` over the node.
    pub y: f64,
    /// Smallest selected node strictly containing this one.
    pub star_parent: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linearization {
    q: f64,
    selected: Vec<SelectedNode>,
    index: HashMap<NodeId, usize>,
    // selected node owning each leaf, indexed like `tree.leaves()`
    owner: Vec<NodeId>,
}

impl Linearization {
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Selected nodes in increasing node id, the root first.
    pub fn selected(&self) -> &[SelectedNode] {
        &self.selected
    }

    pub fn get(&self, node: NodeId) -> Option<&SelectedNode> {
        self.index.get(&node).map(|&i| &self.selected[i])
    }

    pub fn root(&self) -> &SelectedNode {
        &self.selected[0]
    }

    /// Selected node whose atom contains the leaf at position `leaf_pos`.
    pub fn owner(&self, leaf_pos: usize) -> NodeId {
        self.owner[leaf_pos]
    }

    pub fn owners(&self) -> &[NodeId] {
        &self.owner
    }

    /// `Σ_I y_I χ_{A_I}`, evaluated on every leaf.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.owner
            .iter()
            .map(|&o| self.get(o).expect("owner is selected").y)
            .collect()
    }

    pub fn sum_x_pow(&self, r: f64) -> f64 {
        self.selected.iter().map(|s| s.x.powf(r)).sum()
    }

    pub fn sum_atom_measure(&self) -> f64 {
        self.selected.iter().map(|s| s.atom_measure).sum()
    }

    /// Selected nodes whose star parent is `node`.
    pub fn star_children(&self, node: NodeId) -> impl Iterator<Item = &SelectedNode> + '_ {
        self.selected
            .iter()
            .filter(move |s| s.star_parent == Some(node))
    }
}

/// Computes the linearization of `M_T φ` for the exponent `q > 1`.
pub fn linearize(phi: &StepFunction<'_>, q: f64) -> Result<Linearization> {
    if !(q > 1.0) {
        return Err(Error::argument(format!(
            "linearization needs q > 1, got {q}"
        )));
    }
    let tree = phi.tree();
    let averages = phi.node_averages();
    let mut owner = vec![Tree::ROOT; tree.leaf_count()];

    // Depth-first walk keeping the strict running maxima of the chain. The
    // topmost node attaining (up to tolerance) the chain maximum is always one
    // of these record nodes, and records are increasing, so a binary search
    // finds it.
    struct Record {
        node: NodeId,
        avg: f64,
        depth: u32,
    }
    let mut records: Vec<Record> = Vec::new();
    let mut stack = vec![Tree::ROOT];
    while let Some(id) = stack.pop() {
        let depth = tree.depth(id);
        while records.last().is_some_and(|r| r.depth >= depth) {
            records.pop();
        }
        let avg = averages[id];
        if records.last().is_none_or(|r| avg > r.avg) {
            records.push(Record {
                node: id,
                avg,
                depth,
            });
        }
        let children = tree.children(id);
        if children.is_empty() {
            let max = records.last().expect("root is always a record").avg;
            let threshold = max - TIE_TOLERANCE * (1.0 + max.abs());
            let first = records.partition_point(|r| r.avg < threshold);
            let pos = tree.leaf_position(id).expect("childless node is a leaf");
            owner[pos] = records[first].node;
        } else {
            stack.extend(children.iter().rev());
        }
    }

    let mut atom_measure: HashMap<NodeId, (f64, f64)> = HashMap::new();
    atom_measure.insert(Tree::ROOT, (0.0, 0.0));
    for ((&leaf, &o), &v) in tree.leaves().iter().zip(&owner).zip(phi.values()) {
        let entry = atom_measure.entry(o).or_insert((0.0, 0.0));
        let m = tree.measure(leaf);
        entry.0 += m;
        entry.1 += m * v;
    }
    let mut ids: Vec<NodeId> = atom_measure.keys().copied().collect();
    ids.sort_unstable();

    // nearest selected strict ancestor, top-down
    let mut nearest = vec![None; tree.len()];
    for id in 1..tree.len() {
        let parent = tree.parent(id).expect("non-root node has a parent");
        nearest[id] = if atom_measure.contains_key(&parent) {
            Some(parent)
        } else {
            nearest[parent]
        };
    }

    let exponent = 1.0 / q - 1.0;
    let mut selected: Vec<SelectedNode> = Vec::with_capacity(ids.len());
    let mut index: HashMap<NodeId, usize> = HashMap::with_capacity(ids.len());
    for id in ids {
        let (a, integral) = atom_measure[&id];
        let star_parent = nearest[id];
        let rank = match star_parent {
            None => 0,
            Some(p) => selected[index[&p]].rank + 1,
        };
        let x = if a > 0.0 {
            a.powf(exponent) * integral
        } else {
            0.0
        };
        index.insert(id, selected.len());
        selected.push(SelectedNode {
            node: id,
            rank,
            measure: tree.measure(id),
            atom_measure: a,
            atom_integral: integral,
            x,
            y: averages[id],
            star_parent,
        });
    }
    Ok(Linearization {
        q,
        selected,
        index,
        owner,
    })
}

/// `∫ (M_T φ)^s φ^t`, with `0^0 = 1`.
pub fn mixed_integral(phi: &StepFunction<'_>, s: f64, t: f64) -> Result<f64> {
    let max = maximal_function(phi);
    mixed_integral_with(phi, &max, s, t)
}

pub(crate) fn mixed_integral_with(
    phi: &StepFunction<'_>,
    max: &StepFunction<'_>,
    s: f64,
    t: f64,
) -> Result<f64> {
    if !(s >= 0.0) || !(t >= 0.0) {
        return Err(Error::argument(format!(
            "mixed integral exponents must be nonnegative, got s={s}, t={t}"
        )));
    }
    Ok(phi
        .weighted()
        .zip(max.values())
        .map(|((m, v), &mv)| m * mv.powf(s) * v.powf(t))
        .sum())
}

/// Both sides of the weak-type estimate at level `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakType {
    /// `μ({M_T φ ≥ λ})`.
    pub measure: f64,
    /// `(1/λ) ∫_{M_T φ ≥ λ} φ`.
    pub bound: f64,
}

pub fn weak_type_check(phi: &StepFunction<'_>, lambda: f64) -> Result<WeakType> {
    weak_type_with(phi, &maximal_function(phi), lambda)
}

pub(crate) fn weak_type_with(
    phi: &StepFunction<'_>,
    max: &StepFunction<'_>,
    lambda: f64,
) -> Result<WeakType> {
    let f = phi.integral();
    if !(lambda > f) {
        return Err(Error::argument(format!(
            "level must exceed the mean: λ = {lambda} <= f = {f}"
        )));
    }
    let (measure, integral) = phi
        .weighted()
        .zip(max.values())
        .filter(|(_, &mv)| mv >= lambda)
        .fold((0.0, 0.0), |(m, i), ((mu, v), _)| (m + mu, i + mu * v));
    Ok(WeakType {
        measure,
        bound: integral / lambda,
    })
}

/// The integrals of `φ` and `M_T φ` that the sharp inequalities involve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub p: f64,
    pub q: f64,
    /// `∫ φ`
    pub mean: f64,
    /// `∫ φ^q`
    pub q_moment: f64,
    /// `∫ φ^p`
    pub p_moment: f64,
    /// `∫ (M_T φ)^p`
    pub max_p: f64,
    /// `∫ (M_T φ)^q`
    pub max_q: f64,
    /// `∫ (M_T φ)^{p-q} φ^q`
    pub max_mixed: f64,
    /// `∫ φ (M_T φ)^{p-1}`
    pub max_dual: f64,
}

impl Moments {
    pub fn of(phi: &StepFunction<'_>, p: f64, q: f64) -> Result<Self> {
        if !(q > 1.0 && p > q) {
            return Err(Error::domain(format!(
                "requires 1 < q < p, got p={p}, q={q}"
            )));
        }
        let max = maximal_function(phi);
        Ok(Moments {
            p,
            q,
            mean: phi.integral(),
            q_moment: phi.integral_power(q)?,
            p_moment: phi.integral_power(p)?,
            max_p: mixed_integral_with(phi, &max, p, 0.0)?,
            max_q: mixed_integral_with(phi, &max, q, 0.0)?,
            max_mixed: mixed_integral_with(phi, &max, p - q, q)?,
            max_dual: mixed_integral_with(phi, &max, p - 1.0, 1.0)?,
        })
    }
}
