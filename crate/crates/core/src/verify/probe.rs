//! How close one member of the extremal family comes to the Bellman value.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::extremizer::{solve_z_for_a, ExtremizerParams, ExtremizerRealization};
use crate::scalars::{bellman_three_on_surface, bellman_two, RootConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub k: usize,
    pub alpha: f64,
    /// Measured `∫φ_α`.
    pub mean: f64,
    /// Measured `∫φ_α^q`.
    pub q_moment: f64,
    /// Measured `∫φ_α^p`.
    pub p_moment: f64,
    /// `∫(M_T φ_α)^p`.
    pub achieved: f64,
    /// `ω_q(f^q/A)^p F(f, A)`.
    pub target: f64,
    /// `achieved / target`.
    pub ratio: f64,
    /// `achieved / (F·ω_p(f^p/F)^p)` at the measured `f`, `F`.
    pub ratio_two: f64,
}

/// Builds `φ_α` at `α = 1/k` aimed at `(f, A)` and compares what it achieves
/// with the Bellman value on the surface.
pub fn near_extremal_probe(
    p: f64,
    q: f64,
    mean: f64,
    q_moment: f64,
    k: usize,
    cfg: &RootConfig,
) -> Result<ProbeRow> {
    let target = bellman_three_on_surface(p, q, mean, q_moment)?;
    let alpha = 1.0 / k as f64;
    let z = solve_z_for_a(q, alpha, mean, q_moment, cfg)?;
    let params = ExtremizerParams::from_z(p, q, mean, k, 1, z)?;
    let r = ExtremizerRealization::build(&params)?;
    let m = r.moments();
    Ok(ProbeRow {
        k,
        alpha,
        mean: m.mean,
        q_moment: m.q_moment,
        p_moment: m.p_moment,
        achieved: m.max_p,
        target,
        ratio: m.max_p / target,
        ratio_two: m.max_p / bellman_two(p, m.mean, m.p_moment)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_climbs_towards_one() {
        let cfg = RootConfig::default();
        let rows: Vec<ProbeRow> = [4, 16, 64, 256]
            .iter()
            .map(|&k| near_extremal_probe(2.0, 1.5, 1.0, 1.2, k, &cfg).unwrap())
            .collect();
        for r in &rows {
            eprintln!("{r:?}");
            assert!(r.ratio <= 1.0 + 1e-10);
            assert!(r.ratio_two <= 1.0 + 1e-10);
            assert!((r.q_moment - 1.2).abs() < 1e-9);
        }
        assert!(rows[3].ratio > rows[0].ratio);
    }

    #[test]
    fn barely_nonconstant_point_is_nearly_exact() {
        let r = near_extremal_probe(3.0, 2.0, 1.0, 1.0 + 1e-6, 64, &RootConfig::default()).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-4, "{r:?}");
    }
}
