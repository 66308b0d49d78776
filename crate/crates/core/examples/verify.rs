//! A seeded verification run over random trees and value laws, then a
//! bit-exact replay of the tightest case.
//!
//! cargo run --release --example verify

use dyadic_bellman::verify::{replay, run_plan, TreeFamily, VerificationPlan};

fn main() -> dyadic_bellman::Result<()> {
    let plan = VerificationPlan {
        seed: 2024,
        samples: 50,
        trees: TreeFamily::Mixed,
        min_depth: 3,
        max_depth: 8,
        ..VerificationPlan::default()
    };
    let report = run_plan(&plan)?;
    print!("{}", report.summary_csv_string()?);
    println!(
        "{} checks, {} failures",
        report.total_checks(),
        report.total_failures()
    );

    let stats = report.get("q-maximal[beta=0.1]").expect("slot exists");
    if let Some(case) = &stats.argmin {
        let again = replay(&plan, &stats.name, case)?;
        println!(
            "replayed {}: scaled residual {} (recorded {})",
            stats.name,
            again.scaled(),
            stats.worst_scaled
        );
    }
    Ok(())
}
