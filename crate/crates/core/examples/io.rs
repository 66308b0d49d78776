//! File formats: trees as JSON lines, step functions as `leaf_id,value`
//! CSV, linearizations as one CSV row per selected node.
//!
//! cargo run --example io

use dyadic_bellman::io::{
    read_step_csv, read_tree_jsonl, write_linearization_csv, write_step_csv, write_tree_jsonl,
};
use dyadic_bellman::maximal::linearize;
use dyadic_bellman::trees::{build_random_tree, SplitLaw, StepFunction};

fn main() -> dyadic_bellman::Result<()> {
    let tree = build_random_tree(3, 3, 3, SplitLaw::Uniform)?;
    let phi = StepFunction::from_fn(&tree, |leaf| 1.0 + (leaf % 4) as f64)?;

    let mut tree_file = Vec::new();
    write_tree_jsonl(&tree, &mut tree_file)?;
    let mut step_file = Vec::new();
    write_step_csv(&phi, &mut step_file)?;
    println!("tree.jsonl, first lines:");
    for line in String::from_utf8_lossy(&tree_file).lines().take(3) {
        println!("  {line}");
    }

    let tree_back = read_tree_jsonl(tree_file.as_slice())?;
    let phi_back = read_step_csv(&tree_back, step_file.as_slice())?;
    println!(
        "round trip exact: {}",
        tree_back == tree && phi_back.values() == phi.values()
    );

    let mut lin_file = Vec::new();
    write_linearization_csv(&linearize(&phi, 2.0)?, &mut lin_file)?;
    print!("{}", String::from_utf8_lossy(&lin_file));
    Ok(())
}
