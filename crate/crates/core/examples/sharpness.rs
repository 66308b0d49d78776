//! The sharpness sweep: as alpha = 1/k shrinks, the extremal family
//! approaches the Bellman value on the surface. Writes a CSV and an SVG
//! into the system temp directory.
//!
//! cargo run --example sharpness

use dyadic_bellman::extremizer::sharpness_report;
use dyadic_bellman::scalars::RootConfig;
use dyadic_bellman::svg::LogLogPlot;

fn main() -> dyadic_bellman::Result<()> {
    let report = sharpness_report(
        2.0,
        1.5,
        1.0,
        1.2,
        &[4, 16, 64, 256],
        &RootConfig::default(),
    )?;
    println!("target {}", report.target);
    for row in &report.rows {
        println!(
            "k {:>3}: achieved {:.10} gap {:.3e} abs_err_z {:.3e}",
            row.k,
            row.mtp_integral,
            row.relative_target_gap(),
            row.abs_err_z
        );
    }
    println!(
        "errors strictly decreasing: {}",
        report.errors_strictly_decreasing()
    );

    let dir = std::env::temp_dir();
    std::fs::write(dir.join("sharpness.csv"), report.to_csv_string()?)?;
    let svg = LogLogPlot::new("Sharpness sweep", "k", "abs_err_z")
        .with_series(
            "abs_err_z",
            report
                .rows
                .iter()
                .map(|r| (r.k as f64, r.abs_err_z))
                .collect(),
        )
        .render()?;
    std::fs::write(dir.join("sharpness.svg"), svg)?;
    println!("wrote sharpness.csv and sharpness.svg to {}", dir.display());
    Ok(())
}
