//! Scalar building blocks: H_p and its inverse, the two-variable Bellman
//! function, the surface value, and the three-variable upper bound.
//!
//! cargo run --example scalars

use dyadic_bellman::scalars::{
    bellman_three_on_surface, bellman_two, beta_from_moments, h_p, omega, solve_z,
    surface_p_moment, upper_bound_three, RootConfig,
};

fn main() -> dyadic_bellman::Result<()> {
    let w = omega(2.0, 0.75)?;
    println!("omega_2(0.75) = {w}, H_2 of it = {}", h_p(2.0, w));
    println!("omega_3(0) = {}", omega(3.0, 0.0)?);

    println!("B(f = 1, F = 2) at p = 2: {}", bellman_two(2.0, 1.0, 2.0)?);
    println!(
        "beta for the same point: {}",
        beta_from_moments(2.0, 1.0, 2.0)?
    );

    let (p, q, f, a) = (2.0, 1.5, 1.0, 1.2);
    let big_f = surface_p_moment(p, q, f, a)?;
    println!("surface F(1, 1.2) = {big_f}");
    println!(
        "Bellman value there = {}",
        bellman_three_on_surface(p, q, f, a)?
    );
    println!(
        "upper bound at F = 3 = {}",
        upper_bound_three(p, q, f, a, 3.0)?
    );

    // the alpha -> 0 limit of the z equation is omega_q
    let cfg = RootConfig::default();
    for alpha in [1e-1, 1e-2, 1e-3] {
        println!("z({alpha}) = {}", solve_z(q, alpha, 0.75, &cfg)?);
    }
    println!("omega_q(0.75) = {}", omega(q, 0.75)?);

    match bellman_two(2.0, 1.0, 0.5) {
        Err(e) => println!("F below f^p is rejected: {e}"),
        Ok(v) => println!("unexpected value {v}"),
    }
    Ok(())
}
