//! Convergence of the extremal family to the three-variable Bellman value.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_z_for_a, ExtremizerParams, ExtremizerRealization};
use crate::error::{Error, Result};
use crate::scalars::{check_pq, omega, surface_p_moment, RootConfig};

/// One `α = 1/k` of the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub k: usize,
    pub alpha: f64,
    pub z: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "F_alpha")]
    pub f_alpha: f64,
    #[serde(rename = "MTp_integral")]
    pub mtp_integral: f64,
    #[serde(rename = "target_omega_q_pow_p_times_F")]
    pub target: f64,
    /// `|z^p - ω_q^p|`.
    pub abs_err_z: f64,
    /// `|F(α) - F(f, A)|`.
    #[serde(rename = "abs_err_F")]
    pub abs_err_f: f64,
    #[serde(rename = "rank_M")]
    pub rank_m: usize,
    pub tail_mass: f64,
}

impl SharpnessRow {
    /// `|∫(M_T φ_α)^p - target|`.
    pub fn target_gap(&self) -> f64 {
        (self.mtp_integral - self.target).abs()
    }

    pub fn relative_target_gap(&self) -> f64 {
        self.target_gap() / self.target
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub p: f64,
    pub q: f64,
    pub mean: f64,
    pub q_moment: f64,
    /// `ω_q(f^q/A)`.
    pub omega_q: f64,
    /// `F(f, A)` on the surface.
    pub surface_p_moment: f64,
    /// `ω_q(f^q/A)^p F(f, A)`.
    pub target: f64,
    pub rows: Vec<SharpnessRow>,
}

impl SharpnessReport {
    fn strictly_decreasing(values: impl Iterator<Item = f64>) -> bool {
        let v: Vec<f64> = values.collect();
        v.windows(2).all(|w| w[1] < w[0])
    }

    /// Whether `abs_err_z`, `abs_err_F` and the target gap all strictly
    /// decrease from row to row.
    pub fn errors_strictly_decreasing(&self) -> bool {
        Self::strictly_decreasing(self.rows.iter().map(|r| r.abs_err_z))
            && Self::strictly_decreasing(self.rows.iter().map(|r| r.abs_err_f))
            && Self::strictly_decreasing(self.rows.iter().map(SharpnessRow::target_gap))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Sweeps `α = 1/k` over `ks` with the default truncation rank.
pub fn sharpness_report(
    p: f64,
    q: f64,
    mean: f64,
    q_moment: f64,
    ks: &[usize],
    cfg: &RootConfig,
) -> Result<SharpnessReport> {
    sharpness_report_with(p, q, mean, q_moment, ks, None, cfg)
}

/// As [`sharpness_report`], with an optional fixed truncation rank. Rows are
/// computed in parallel and returned in the order of `ks`.
pub fn sharpness_report_with(
    p: f64,
    q: f64,
    mean: f64,
    q_moment: f64,
    ks: &[usize],
    max_rank: Option<usize>,
    cfg: &RootConfig,
) -> Result<SharpnessReport> {
    check_pq(p, q)?;
    if ks.is_empty() {
        return Err(Error::argument("need at least one k"));
    }
    let surface = surface_p_moment(p, q, mean, q_moment)?;
    let omega_q = omega(q, mean.powf(q) / q_moment)?;
    let target = omega_q.powf(p) * surface;
    let rows = ks
        .par_iter()
        .map(|&k| {
            if k < 2 {
                return Err(Error::argument(format!("k must be at least 2, got {k}")));
            }
            let alpha = 1.0 / k as f64;
            let z = solve_z_for_a(q, alpha, mean, q_moment, cfg)?;
            let mut params = ExtremizerParams::from_z(p, q, mean, k, 1, z)?;
            params.max_rank = max_rank;
            let realization = ExtremizerRealization::build(&params)?;
            let f_alpha = params.p_moment();
            Ok(SharpnessRow {
                k,
                alpha,
                z,
                beta: params.beta(),
                gamma: params.gamma(),
                f_alpha,
                mtp_integral: realization.max_p().total(),
                target,
                abs_err_z: (z.powf(p) - omega_q.powf(p)).abs(),
                abs_err_f: (f_alpha - surface).abs(),
                rank_m: realization.max_rank(),
                tail_mass: realization.quotient().tail_mass(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SharpnessReport {
        p,
        q,
        mean,
        q_moment,
        omega_q,
        surface_p_moment: surface,
        target,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_converges() {
        let r = sharpness_report(
            2.0,
            1.5,
            1.0,
            1.2,
            &[4, 16, 64, 256],
            &RootConfig::default(),
        )
        .unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.errors_strictly_decreasing());
        assert!(r.rows[3].relative_target_gap() < 0.02);
        for row in &r.rows {
            let zpf = row.z.powf(2.0) * row.f_alpha;
            assert!((row.mtp_integral - zpf).abs() <= 1e-10 * row.f_alpha);
        }
    }

    #[test]
    fn csv_header_is_fixed() {
        let r = sharpness_report(2.0, 1.5, 1.0, 1.2, &[4], &RootConfig::default()).unwrap();
        let csv = r.to_csv_string().unwrap();
        assert!(csv.starts_with(
            "k,alpha,z,beta,gamma,F_alpha,MTp_integral,target_omega_q_pow_p_times_F,\
             abs_err_z,abs_err_F,rank_M,tail_mass\n"
        ));
    }

    #[test]
    fn domain_errors_propagate() {
        let cfg = RootConfig::default();
        let err = sharpness_report(2.0, 1.5, 1.0, 0.9, &[4], &cfg).unwrap_err();
        assert!(err.to_string().contains("requires f^q < A"));
        assert!(sharpness_report(2.0, 1.5, 1.0, 1.2, &[], &cfg).is_err());
        assert!(sharpness_report(2.0, 1.5, 1.0, 1.2, &[1], &cfg).is_err());
    }
}
