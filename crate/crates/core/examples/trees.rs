//! Building trees: regular k-adic trees, seeded random trees, and the
//! rank-quotient of the extremal tree used by the extremizer.
//!
//! cargo run --example trees

use dyadic_bellman::trees::{build_random_tree, build_s_alpha, SplitLaw, StepFunction, Tree};

fn main() -> dyadic_bellman::Result<()> {
    let binary = Tree::kadic(2, 4)?;
    println!(
        "binary depth 4: {} nodes, {} leaves, smallest leaf {}",
        binary.len(),
        binary.leaf_count(),
        binary.max_leaf_measure()
    );

    let random = build_random_tree(7, 6, 4, SplitLaw::Skewed)?;
    let total: f64 = random.leaves().iter().map(|&l| random.measure(l)).sum();
    println!(
        "random seed 7: {} nodes, depth {}, leaf measures sum to {total}",
        random.len(),
        random.max_depth()
    );

    // a step function is one value per leaf; node averages come for free
    let phi = StepFunction::from_fn(&binary, |leaf| (leaf % 5) as f64)?;
    println!(
        "integral {}, root average {}",
        phi.integral(),
        phi.node_averages()[0]
    );

    // rank quotient for alpha = 1/8, truncated at rank 40
    let s = build_s_alpha(8, 1, 40)?;
    println!(
        "quotient k = {}: alpha {}, atom mass {:.12}, tail mass {:.3e}",
        s.k(),
        s.alpha(),
        s.atom_mass_total(),
        s.tail_mass()
    );
    for level in s.levels().iter().take(3) {
        println!("  {level:?}");
    }
    Ok(())
}
