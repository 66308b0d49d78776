//! Coefficients of the extremal-family estimate and the `β`-parameterized
//! route to the two-variable Bellman value.

use serde::{Deserialize, Serialize};

use super::roots::{bisect, expand_upper, RootConfig};
use super::{check_mean, check_p, check_pq, g_coeff};
use crate::error::{Error, Result};

/// The four coefficients `A, B, C, D` at `(α, β)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl AlphaCoefficients {
    /// `A/B` as `α → 0⁺`: `p(β+1)^q / G(p,q,β)`.
    pub fn ratio_limit(p: f64, q: f64, beta: f64) -> f64 {
        p * (beta + 1.0).powf(q) / g_coeff(p, q, beta)
    }

    /// `C` as `α → 0⁺`: `(q-1)β / (β+1)^q`.
    pub fn c_limit(q: f64, beta: f64) -> f64 {
        (q - 1.0) * beta / (beta + 1.0).powf(q)
    }

    /// `D` as `α → 0⁺`: `(p-q) / (p(β+1)^{q-1})`.
    pub fn d_limit(p: f64, q: f64, beta: f64) -> f64 {
        (p - q) / (p * (beta + 1.0).powf(q - 1.0))
    }
}

/// Evaluates `A, B, C, D` with `b = β+1` and `z = b - βα`.
///
/// `B` and `C` contain differences of nearly equal powers; both are written
/// through `expm1`/`ln_1p` so that they stay accurate as `α → 0⁺`.
pub fn alpha_coefficients(p: f64, q: f64, alpha: f64, beta: f64) -> AlphaCoefficients {
    let b = beta + 1.0;
    let z = b - beta * alpha;
    let shrink = (-beta * alpha / b).ln_1p();
    let a = p * alpha * z.powf(q) * b.powf(p - 1.0);
    let big_b =
        -q * b.powf(p) * (p * shrink).exp_m1() + alpha * b.powf(p - 1.0) * ((p - q) * b - p * beta);
    let c = -((q - 1.0) * shrink).exp_m1() / (alpha * z.powf(q - 1.0));
    let d = (p * b.powf(p - q) - q * z.powf(p - q)) / (p * b.powf(p - 1.0));
    AlphaCoefficients { a, b: big_b, c, d }
}

/// `β ∈ [0, 1/(p-1))` solving `1/((β+1)^{p-1}(1-β(p-1))) = F/f^p`.
pub fn beta_from_moments(p: f64, mean: f64, p_moment: f64) -> Result<f64> {
    beta_from_moments_with(p, mean, p_moment, &RootConfig::default())
}

pub fn beta_from_moments_with(p: f64, mean: f64, p_moment: f64, cfg: &RootConfig) -> Result<f64> {
    check_p(p)?;
    check_mean(mean)?;
    let fp = mean.powf(p);
    if !(p_moment >= fp) || !p_moment.is_finite() {
        return Err(Error::domain(format!(
            "requires f^p <= F, got f^p = {fp}, F = {p_moment}"
        )));
    }
    let ratio = p_moment / fp;
    if ratio == 1.0 {
        return Ok(0.0);
    }
    let g = |beta: f64| {
        let den = (beta + 1.0).powf(p - 1.0) * (1.0 - beta * (p - 1.0));
        if den > 0.0 {
            1.0 / den - ratio
        } else {
            f64::INFINITY
        }
    };
    bisect("beta_from_moments", g, 0.0, 1.0 / (p - 1.0), cfg)
}

/// `A_β = (q-1)β/(β+1)^q + (p-q)/(p(β+1)^{q-1})`.
pub fn a_beta(p: f64, q: f64, beta: f64) -> f64 {
    let b = beta + 1.0;
    (q - 1.0) * beta / b.powf(q) + (p - q) / (p * b.powf(q - 1.0))
}

/// `h_β(y) = y^{p-q} - A_β y^p`.
pub fn h_beta(p: f64, q: f64, beta: f64, y: f64) -> f64 {
    y.powf(p - q) - a_beta(p, q, beta) * y.powf(p)
}

/// Inverse of [`h_beta`] on its decreasing branch `[1, ∞)`.
pub fn h_beta_inverse(p: f64, q: f64, beta: f64, v: f64, cfg: &RootConfig) -> Result<f64> {
    check_pq(p, q)?;
    let top = h_beta(p, q, beta, 1.0);
    if !v.is_finite() || v > top {
        return Err(Error::domain(format!(
            "h_beta inverse requires v <= h_beta(1) = {top}, got {v}"
        )));
    }
    if v == top {
        return Ok(1.0);
    }
    let g = |y: f64| h_beta(p, q, beta, y) - v;
    let hi = expand_upper("h_beta_inverse", g, 1.0, 2.0, cfg)?;
    bisect("h_beta_inverse", g, 1.0, hi, cfg)
}

/// `F·(h_β^{-1}(L))^p` with `β` from [`beta_from_moments`] and
/// `L = (q/p)(β+1)^{1-q} f^p/F`; agrees with [`super::bellman_two`] for every `q`.
pub fn bellman_two_via_q(
    p: f64,
    q: f64,
    mean: f64,
    p_moment: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    check_pq(p, q)?;
    let beta = beta_from_moments_with(p, mean, p_moment, cfg)?;
    if beta == 0.0 {
        return Ok(p_moment);
    }
    let b = beta + 1.0;
    let level = q / p * b.powf(1.0 - q) * mean.powf(p) / p_moment;
    let y = h_beta_inverse(p, q, beta, level, cfg)?;
    Ok(p_moment * y.powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{bellman_two, omega};

    fn literal(p: f64, q: f64, alpha: f64, beta: f64) -> AlphaCoefficients {
        let b = beta + 1.0;
        let z = b - beta * alpha;
        AlphaCoefficients {
            a: p * alpha * z.powf(q) * b.powf(p - 1.0),
            b: p * b.powf(p - 1.0) * z - (p - q) * b.powf(p) * (1.0 - alpha) - q * z.powf(p),
            c: (b.powf(q - 1.0) - z.powf(q - 1.0)) / (alpha * z.powf(q - 1.0) * b.powf(q - 1.0)),
            d: (p * b.powf(p - q) - q * z.powf(p - q)) / (p * b.powf(p - 1.0)),
        }
    }

    #[test]
    fn stable_forms_match_literal_formulas() {
        for (p, q) in [(2.0, 1.5), (3.0, 2.0), (1.5, 1.2)] {
            for alpha in [0.5, 0.1, 0.01] {
                for beta in [0.1, 1.0, 5.0] {
                    let s = alpha_coefficients(p, q, alpha, beta);
                    let l = literal(p, q, alpha, beta);
                    for (x, y) in [(s.a, l.a), (s.b, l.b), (s.c, l.c), (s.d, l.d)] {
                        assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn small_alpha_limits() {
        let (p, q, beta) = (3.0, 2.0, 0.7);
        let s = alpha_coefficients(p, q, 1e-8, beta);
        assert!((s.a / s.b - AlphaCoefficients::ratio_limit(p, q, beta)).abs() <= 1e-6);
        assert!((s.c - AlphaCoefficients::c_limit(q, beta)).abs() <= 1e-6);
        assert!((s.d - AlphaCoefficients::d_limit(p, q, beta)).abs() <= 1e-6);
    }

    #[test]
    fn beta_closed_form() {
        assert_eq!(beta_from_moments(2.0, 1.0, 1.0).unwrap(), 0.0);
        let beta = beta_from_moments(2.0, 1.0, 2.0).unwrap();
        assert!((beta - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((beta + 1.0 - omega(2.0, 0.5).unwrap()).abs() < 1e-12);
        assert!(beta_from_moments(2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn a_beta_shape() {
        let (p, q) = (3.0, 2.0);
        assert!((a_beta(p, q, 0.0) - (p - q) / p).abs() < 1e-15);
        let mut prev = a_beta(p, q, 0.0);
        for i in 1..50 {
            let beta = i as f64 / 100.0;
            let cur = a_beta(p, q, beta);
            assert!(cur > prev);
            prev = cur;
        }
    }

    #[test]
    fn via_q_matches_bellman_two() {
        let cfg = RootConfig::default();
        let direct = bellman_two(2.0, 1.0, 2.0).unwrap();
        for q in [1.1, 1.5, 1.9] {
            let via = bellman_two_via_q(2.0, q, 1.0, 2.0, &cfg).unwrap();
            assert!((via - direct).abs() < 1e-9 * direct);
        }
    }
}
