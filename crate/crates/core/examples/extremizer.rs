//! One member of the extremal family: closed forms next to atom-wise sums,
//! and a small explicit tree checked against the generic maximal operator.
//!
//! cargo run --example extremizer

use dyadic_bellman::extremizer::{solve_z_for_a, ExtremizerParams, ExtremizerRealization};
use dyadic_bellman::scalars::RootConfig;

fn main() -> dyadic_bellman::Result<()> {
    let (p, q, f, a, k) = (2.0, 1.5, 1.0, 1.2, 16);
    let z = solve_z_for_a(q, 1.0 / k as f64, f, a, &RootConfig::default())?;
    let params = ExtremizerParams::from_z(p, q, f, k, 1, z)?;
    println!(
        "alpha {} z {z} beta {} gamma {} M {}",
        params.alpha(),
        params.beta(),
        params.gamma(),
        params.resolved_max_rank()
    );

    let r = ExtremizerRealization::build(&params)?;
    for (name, s) in [
        ("mean", r.mean()),
        ("q-moment", r.q_moment()),
        ("p-moment", r.p_moment()),
        ("int (M phi)^p", r.max_p()),
    ] {
        println!(
            "{name:>14}: sum {:.15} + tail {:.3e} vs closed form {:.15}",
            s.numeric, s.tail, s.closed_form
        );
    }
    let m = r.maximal_on_quotient();
    println!("M phi on rank 0 atoms: {} (y = {})", m[0].value, m[0].y);

    // a small family expands into an explicit tree
    let small = ExtremizerParams::from_z(p, q, f, 2, 1, 1.6)?.with_max_rank(4);
    let check = ExtremizerRealization::build(&small)?.explicit_check()?;
    println!(
        "explicit tree vs quotient, worst relative error {:.2e}",
        check.worst_rel_err()
    );
    Ok(())
}
