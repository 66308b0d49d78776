//! Closed-form scalar functions behind the Bellman values, and their inverses.
//!
//! Every inversion is a bracketed bisection on a branch where the function is
//! strictly monotone. Domain violations are reported as [`Error::Domain`]
//! rather than clamped.

mod coeffs;
mod roots;

pub use coeffs::{
    a_beta, alpha_coefficients, bellman_two_via_q, beta_from_moments, beta_from_moments_with,
    h_beta, h_beta_inverse, AlphaCoefficients,
};
pub(crate) use roots::{bisect, expand_upper};
pub use roots::{Bracketing, RootConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack for quantities that equal a domain endpoint up to rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("requires p > 1, got p = {p}")))
    }
}

pub(crate) fn check_pq(p: f64, q: f64) -> Result<()> {
    if q > 1.0 && p > q && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "requires 1 < q < p, got p = {p}, q = {q}"
        )))
    }
}

pub(crate) fn check_mean(f: f64) -> Result<()> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("requires f > 0, got f = {f}")))
    }
}

/// `H_p(z) = -(p-1) z^p + p z^{p-1}`, strictly decreasing from 1 to 0 on
/// `[1, p/(p-1)]`.
pub fn h_p(p: f64, z: f64) -> f64 {
    -(p - 1.0) * z.powf(p) + p * z.powf(p - 1.0)
}

/// Inverse of [`h_p`] on `[1, p/(p-1)]`.
pub fn omega(p: f64, tau: f64) -> Result<f64> {
    omega_with(p, tau, &RootConfig::default())
}

pub fn omega_with(p: f64, tau: f64, cfg: &RootConfig) -> Result<f64> {
    check_p(p)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::domain(format!(
            "omega requires tau in [0, 1], got {tau}"
        )));
    }
    let top = p / (p - 1.0);
    if tau == 1.0 {
        return Ok(1.0);
    }
    if tau == 0.0 {
        return Ok(top);
    }
    bisect("omega", |z| h_p(p, z) - tau, 1.0, top, cfg)
}

/// `F·ω_p(f^p/F)^p`: the largest `∫(M_T φ)^p` over `φ ≥ 0` with `∫φ = f`
/// and `∫φ^p = F`.
pub fn bellman_two(p: f64, mean: f64, p_moment: f64) -> Result<f64> {
    check_p(p)?;
    check_mean(mean)?;
    let fp = mean.powf(p);
    if !(p_moment >= fp) || !p_moment.is_finite() {
        return Err(Error::domain(format!(
            "requires f^p <= F, got f^p = {fp}, F = {p_moment}"
        )));
    }
    Ok(p_moment * omega(p, fp / p_moment)?.powf(p))
}

/// Residual of `-(z-α)^q + (1-α)^{q-1} z^q = τ α (1-α)^{q-1}` at `z`, in the
/// literal form of the equation.
pub fn z_equation_residual(q: f64, alpha: f64, tau: f64, z: f64) -> f64 {
    let c = (1.0 - alpha).powf(q - 1.0);
    -(z - alpha).powf(q) + c * z.powf(q) - tau * alpha * c
}

/// Unique root `z ≥ 1` of `-(z-α)^q + (1-α)^{q-1} z^q = τ α (1-α)^{q-1}`.
pub fn solve_z(q: f64, alpha: f64, tau: f64, cfg: &RootConfig) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::domain(format!("requires q > 1, got q = {q}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "requires 0 < alpha < 1, got {alpha}"
        )));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::domain(format!("requires tau in (0, 1], got {tau}")));
    }
    // Divided by α(1-α)^{q-1}, with the difference of powers written through
    // expm1/ln1p so that small α does not cancel catastrophically.
    let a = (q - 1.0) * (-alpha).ln_1p();
    let g = |z: f64| {
        let b = q * (-alpha / z).ln_1p();
        z.powf(q) * (b - a).exp() * (a - b).exp_m1() / alpha - tau
    };
    // g(1) = 1 - τ up to rounding and g decreases, so z = 1 once g(1) <= 0
    if g(1.0) <= 0.0 {
        return Ok(1.0);
    }
    let hi = expand_upper("solve_z", g, 1.0, 2.0, cfg)?;
    bisect("solve_z", g, 1.0, hi, cfg)
}

/// `p(q-1)β + (p-q)(β+1)`.
pub fn g_coeff(p: f64, q: f64, beta: f64) -> f64 {
    p * (q - 1.0) * beta + (p - q) * (beta + 1.0)
}

/// `h(t) = p t^{p-q} - (p-q) t^p`; strictly decreasing on `[1, ∞)` from `q`.
pub fn h_upper(p: f64, q: f64, t: f64) -> f64 {
    p * t.powf(p - q) - (p - q) * t.powf(p)
}

/// Inverse of [`h_upper`] on `[1, ∞)`, defined for `v <= q`.
pub fn h_upper_inverse(p: f64, q: f64, v: f64) -> Result<f64> {
    h_upper_inverse_with(p, q, v, &RootConfig::default())
}

pub fn h_upper_inverse_with(p: f64, q: f64, v: f64, cfg: &RootConfig) -> Result<f64> {
    check_pq(p, q)?;
    if !v.is_finite() || v > q {
        return Err(Error::domain(format!(
            "h inverse requires v <= q = {q}, got {v}"
        )));
    }
    if v == q {
        return Ok(1.0);
    }
    let g = |t: f64| h_upper(p, q, t) - v;
    let hi = expand_upper("h_inverse", g, 1.0, 2.0, cfg)?;
    bisect("h_inverse", g, 1.0, hi, cfg)
}

/// `k(f, A, F) = (p f^{p-q} A - (p-q) f^p) / F`.
pub fn holder_k(p: f64, q: f64, mean: f64, q_moment: f64, p_moment: f64) -> f64 {
    (p * mean.powf(p - q) * q_moment - (p - q) * mean.powf(p)) / p_moment
}

/// `F·h^{-1}(k(f, A, F))^p`, an upper bound for `∫(M_T φ)^p` given all three
/// moments.
pub fn upper_bound_three(p: f64, q: f64, mean: f64, q_moment: f64, p_moment: f64) -> Result<f64> {
    check_pq(p, q)?;
    check_mean(mean)?;
    if !(p_moment > 0.0) {
        return Err(Error::domain(format!("requires F > 0, got {p_moment}")));
    }
    let mut k = holder_k(p, q, mean, q_moment, p_moment);
    if (k - q).abs() <= q * ROUNDING_SLACK {
        // constant functions sit exactly on k = q, where h' vanishes and the
        // inverse would amplify rounding to its square root
        k = q;
    }
    if !(k > 0.0 && k <= q) {
        return Err(Error::domain(format!(
            "requires 0 < k(f,A,F) <= q, got k = {k} (q = {q})"
        )));
    }
    Ok(p_moment * h_upper_inverse(p, q, k)?.powf(p))
}

fn check_q_moment(q: f64, mean: f64, q_moment: f64) -> Result<f64> {
    let fq = mean.powf(q);
    if !(q_moment > fq) || !q_moment.is_finite() {
        return Err(Error::domain(format!(
            "requires f^q < A, got f^q = {fq}, A = {q_moment}"
        )));
    }
    Ok(fq)
}

/// `F(f, A) = f^p / H_p(ω_q(f^q/A))`, the `p`-th moment on which the
/// three-variable Bellman value is known.
pub fn surface_p_moment(p: f64, q: f64, mean: f64, q_moment: f64) -> Result<f64> {
    check_pq(p, q)?;
    check_mean(mean)?;
    let fq = check_q_moment(q, mean, q_moment)?;
    let w = omega(q, fq / q_moment)?;
    let top = p / (p - 1.0);
    if !(w < top) {
        return Err(Error::domain(format!(
            "requires omega_q(f^q/A) < p/(p-1), got {w} >= {top}"
        )));
    }
    Ok(mean.powf(p) / h_p(p, w))
}

/// `ω_q(f^q/A)^p · F(f, A)`.
pub fn bellman_three_on_surface(p: f64, q: f64, mean: f64, q_moment: f64) -> Result<f64> {
    let big_f = surface_p_moment(p, q, mean, q_moment)?;
    let w = omega(q, mean.powf(q) / q_moment)?;
    Ok(w.powf(p) * big_f)
}

/// A parameter tuple `(p, q, f, A, F)` for the Bellman functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellmanPoint {
    pub p: f64,
    pub q: f64,
    pub mean: f64,
    pub q_moment: Option<f64>,
    pub p_moment: Option<f64>,
}

impl BellmanPoint {
    pub fn validate(&self) -> Result<()> {
        check_pq(self.p, self.q)?;
        check_mean(self.mean)?;
        let fp = self.mean.powf(self.p);
        if let Some(a) = self.q_moment {
            check_q_moment(self.q, self.mean, a)?;
            if let Some(big_f) = self.p_moment {
                let cap = big_f.powf(self.q / self.p);
                if !(a < cap) {
                    return Err(Error::domain(format!(
                        "requires A < F^(q/p), got A = {a}, F^(q/p) = {cap}"
                    )));
                }
            }
        } else if let Some(big_f) = self.p_moment {
            if !(big_f >= fp) {
                return Err(Error::domain(format!(
                    "requires f^p <= F, got f^p = {fp}, F = {big_f}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_p_values() {
        assert_eq!(h_p(2.0, 1.0), 1.0);
        assert_eq!(h_p(2.0, 2.0), 0.0);
        assert!((h_p(2.0, 1.5) - 0.75).abs() < 1e-15);
        for p in [1.3, 2.0, 3.7] {
            assert!((h_p(p, 1.0) - 1.0).abs() < 1e-15);
            assert!(h_p(p, p / (p - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn omega_values() {
        for p in [1.5, 2.0, 3.0, 5.0] {
            assert_eq!(omega(p, 1.0).unwrap(), 1.0);
            assert_eq!(omega(p, 0.0).unwrap(), p / (p - 1.0));
        }
        // p = 2: z = 1 + sqrt(1 - τ)
        assert!((omega(2.0, 0.75).unwrap() - 1.5).abs() < 1e-12);
        assert!(omega(2.0, 1.1).is_err());
        assert!(omega(2.0, -0.1).is_err());
        assert!(omega(1.0, 0.5).is_err());
    }

    #[test]
    fn bellman_two_values() {
        assert_eq!(bellman_two(2.0, 1.0, 1.0).unwrap(), 1.0);
        let expected = 3.0 + 2.0 * 2f64.sqrt();
        assert!((bellman_two(2.0, 1.0, 2.0).unwrap() - expected).abs() < 1e-10);
        assert!(matches!(bellman_two(2.0, 1.0, 0.5), Err(Error::Domain(_))));
        assert!(bellman_two(2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn solve_z_residual_and_limits() {
        let cfg = RootConfig::default();
        for q in [1.2, 1.5, 2.0, 4.0] {
            for alpha in [0.5, 0.1, 1e-3] {
                for tau in [0.05, 0.5, 1.0] {
                    let z = solve_z(q, alpha, tau, &cfg).unwrap();
                    assert!(z >= 1.0);
                    assert!(z_equation_residual(q, alpha, tau, z).abs() <= 1e-12);
                }
            }
        }
        // τ = 1 puts the root at z = 1 for every α
        assert!((solve_z(1.5, 1e-4, 1.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert!(solve_z(1.0, 0.1, 0.5, &cfg).is_err());
        assert!(solve_z(2.0, 1.0, 0.5, &cfg).is_err());
        assert!(solve_z(2.0, 0.1, 0.0, &cfg).is_err());
    }

    #[test]
    fn g_coeff_values() {
        assert_eq!(g_coeff(2.0, 1.5, 1.0), 2.0);
        assert_eq!(g_coeff(3.0, 2.0, 0.0), 1.0);
    }

    #[test]
    fn h_upper_and_inverse() {
        assert_eq!(h_upper(3.0, 2.0, 1.0), 2.0);
        assert_eq!(h_upper_inverse(3.0, 2.0, 2.0).unwrap(), 1.0);
        for v in [1.9, 1.0, 0.1, -5.0] {
            let t = h_upper_inverse(3.0, 2.0, v).unwrap();
            assert!((h_upper(3.0, 2.0, t) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
        assert!(h_upper_inverse(3.0, 2.0, 2.5).is_err());
        assert!(h_upper_inverse(3.0, 2.0, f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn upper_bound_three_at_constant_point() {
        let (p, q, f) = (2.5, 1.7, 1.3f64);
        let bound = upper_bound_three(p, q, f, f.powf(q), f.powf(p)).unwrap();
        assert!((bound - f.powf(p)).abs() < 1e-12 * f.powf(p));
        // k > q beyond rounding is rejected
        assert!(upper_bound_three(p, q, f, 2.0 * f.powf(q), f.powf(p)).is_err());
    }

    #[test]
    fn surface_example() {
        let big_f = surface_p_moment(2.0, 1.5, 1.0, 1.2).unwrap();
        let w = omega(1.5, 1.0 / 1.2).unwrap();
        assert!((omega(2.0, 1.0 / big_f).unwrap() - w).abs() < 1e-10);
        let b3 = bellman_three_on_surface(2.0, 1.5, 1.0, 1.2).unwrap();
        let b2 = bellman_two(2.0, 1.0, big_f).unwrap();
        assert!((b3 - b2).abs() < 1e-10 * b2);
        assert!(matches!(
            surface_p_moment(2.0, 1.5, 1.0, 0.9),
            Err(Error::Domain(_))
        ));
        // A so large that ω_q(f^q/A) leaves the range of ω_p
        assert!(surface_p_moment(2.0, 1.5, 1.0, 50.0).is_err());
    }

    #[test]
    fn bellman_point_validation() {
        let mut pt = BellmanPoint {
            p: 2.0,
            q: 1.5,
            mean: 1.0,
            q_moment: Some(1.2),
            p_moment: Some(2.0),
        };
        pt.validate().unwrap();
        pt.q_moment = Some(0.9);
        assert!(pt.validate().is_err());
        pt.q_moment = Some(1.5);
        pt.p_moment = Some(1.2);
        assert!(pt.validate().is_err());
        pt.q_moment = None;
        assert!(pt.validate().is_ok());
        pt.p_moment = Some(0.5);
        assert!(pt.validate().is_err());
    }
}
