//! The tree maximal operator, its linearization, and the integrals that
//! the sharp inequalities compare.
//!
//! cargo run --example maximal

use dyadic_bellman::maximal::{
    linearize, maximal_function, mixed_integral, weak_type_check, Moments,
};
use dyadic_bellman::trees::{StepFunction, Tree};

fn main() -> dyadic_bellman::Result<()> {
    let tree = Tree::kadic(2, 3)?;
    let phi = StepFunction::new(&tree, vec![0.0, 4.0, 1.0, 0.5, 3.0, 0.0, 0.0, 8.0])?;
    let max = maximal_function(&phi);
    println!("phi   {:?}", phi.values());
    println!("M_T   {:?}", max.values());

    let lin = linearize(&phi, 1.5)?;
    println!(
        "{} selected nodes, atoms cover {}",
        lin.selected().len(),
        lin.sum_atom_measure()
    );
    for s in lin.selected() {
        println!(
            "  node {:>2} rank {} y {:.4} parent {:?}",
            s.node, s.rank, s.y, s.star_parent
        );
    }

    println!(
        "int phi^0.5 (M phi)^1.5 = {}",
        mixed_integral(&phi, 0.5, 1.5)?
    );
    let w = weak_type_check(&phi, 3.0)?;
    println!(
        "weak type at 3: |{{M >= 3}}| = {} <= {}",
        w.measure, w.bound
    );

    let m = Moments::of(&phi, 2.0, 1.5)?;
    println!("moments at p = 2, q = 1.5: {m:?}");
    Ok(())
}
