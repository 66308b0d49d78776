//! File formats: trees as JSON lines, step functions and linearizations as CSV.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::Linearization;
use crate::trees::{NodeId, StepFunction, Tree};

/// One line of a tree file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub measure: f64,
    pub depth: u32,
}

pub fn write_tree_jsonl<W: Write>(tree: &Tree, mut out: W) -> Result<()> {
    for (id, node) in tree.nodes().iter().enumerate() {
        let rec = NodeRecord {
            id,
            parent: node.parent(),
            measure: node.measure(),
            depth: node.depth(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a tree written by [`write_tree_jsonl`]. Records may come in any
/// order but ids must be `0..n`; depths must match the parent links.
pub fn read_tree_jsonl<R: BufRead>(input: R) -> Result<Tree> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: NodeRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("tree line {}: {e}", n + 1)))?;
        records.push(rec);
    }
    records.sort_by_key(|r| r.id);
    if let Some((pos, r)) = records.iter().enumerate().find(|(pos, r)| r.id != *pos) {
        return Err(Error::Parse(format!(
            "node ids must be 0..n, found {} at position {pos}",
            r.id
        )));
    }
    let parents: Vec<Option<NodeId>> = records.iter().map(|r| r.parent).collect();
    let measures: Vec<f64> = records.iter().map(|r| r.measure).collect();
    let tree = Tree::from_parents(&parents, &measures)?;
    for r in &records {
        if tree.depth(r.id) != r.depth {
            return Err(Error::Parse(format!(
                "node {} records depth {} but sits at depth {}",
                r.id,
                r.depth,
                tree.depth(r.id)
            )));
        }
    }
    Ok(tree)
}

#[derive(Serialize, Deserialize)]
struct LeafValue {
    leaf_id: NodeId,
    value: f64,
}

pub fn write_step_csv<W: Write>(phi: &StepFunction<'_>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&leaf_id, &value) in phi.tree().leaves().iter().zip(phi.values()) {
        w.serialize(LeafValue { leaf_id, value })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads leaf values for `tree`; every leaf must appear exactly once.
pub fn read_step_csv<'t, R: Read>(tree: &'t Tree, input: R) -> Result<StepFunction<'t>> {
    let mut values = vec![None; tree.leaf_count()];
    for row in csv::Reader::from_reader(input).deserialize() {
        let LeafValue { leaf_id, value } = row?;
        let pos = tree
            .leaf_position(leaf_id)
            .ok_or_else(|| Error::Parse(format!("node {leaf_id} is not a leaf of the tree")))?;
        if values[pos].replace(value).is_some() {
            return Err(Error::Parse(format!("leaf {leaf_id} appears twice")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(pos, v)| {
            v.ok_or_else(|| Error::Parse(format!("no value for leaf {}", tree.leaves()[pos])))
        })
        .collect::<Result<Vec<f64>>>()?;
    StepFunction::new(tree, values)
}

#[derive(Serialize)]
struct LinearizationRow {
    node_id: NodeId,
    rank_in_s: usize,
    mu: f64,
    a_i: f64,
    x_i: f64,
    y_i: f64,
    star_parent: Option<NodeId>,
}

/// One row per selected node: `node_id,rank_in_S,mu,a_I,x_I,y_I,star_parent`.
pub fn write_linearization_csv<W: Write>(lin: &Linearization, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record([
        "node_id",
        "rank_in_S",
        "mu",
        "a_I",
        "x_I",
        "y_I",
        "star_parent",
    ])?;
    for s in lin.selected() {
        w.serialize(LinearizationRow {
            node_id: s.node,
            rank_in_s: s.rank,
            mu: s.measure,
            a_i: s.atom_measure,
            x_i: s.x,
            y_i: s.y,
            star_parent: s.star_parent,
        })?;
    }
    w.flush()?;
    Ok(())
}
