//! Right-hand side minus left-hand side for each sharp inequality.
//!
//! A residual is computed from a [`Moments`] record, so the same code serves
//! explicit step functions and the analytic moments of the extremal family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::{maximal_function, mixed_integral_with, Moments};
use crate::scalars::{bellman_two, check_p, g_coeff, upper_bound_three, ROUNDING_SLACK};
use crate::trees::StepFunction;

/// Default failure threshold: a residual below `-RESIDUAL_TOLERANCE·(1+|rhs|)`
/// is a violation rather than rounding.
pub const RESIDUAL_TOLERANCE: f64 = 1e-11;

/// Both sides of one inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub lhs: f64,
    pub rhs: f64,
}

impl Residual {
    pub fn value(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// `value() / (1 + |rhs|)`, the quantity compared against the tolerance.
    pub fn scaled(&self) -> f64 {
        self.value() / (1.0 + self.rhs.abs())
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.scaled() >= -tol
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("requires beta > 0, got {beta}")))
    }
}

/// `∫(Mφ)^p <= -f^p/(p-1) + p/(p-1)·∫φ(Mφ)^{p-1}`.
pub fn mixed_moment(m: &Moments) -> Residual {
    let p = m.p;
    Residual {
        lhs: m.max_p,
        rhs: (-m.mean.powf(p) + p * m.max_dual) / (p - 1.0),
    }
}

/// The refined estimate weighted by `β > 0`, with `G = G(p,q,β)`:
/// `G·∫(Mφ)^p <= p(β+1)^q ∫(Mφ)^{p-q}φ^q + (p-q)(β+1) f^p
///  + p(q-1)β f^{p-q} ∫(Mφ)^q - p(β+1)^q f^{p-q} ∫φ^q`.
pub fn refined(m: &Moments, beta: f64) -> Result<Residual> {
    check_beta(beta)?;
    let (p, q, f) = (m.p, m.q, m.mean);
    let b = beta + 1.0;
    let g = g_coeff(p, q, beta);
    let bq = b.powf(q);
    let fpq = f.powf(p - q);
    let rhs =
        (p * bq * m.max_mixed + (p - q) * b * f.powf(p) + p * (q - 1.0) * beta * fpq * m.max_q
            - p * bq * fpq * m.q_moment)
            / g;
    Ok(Residual { lhs: m.max_p, rhs })
}

/// The compact form: `G·∫(Mφ)^p <= -q(β+1) f^p + p(β+1)^q ∫(Mφ)^{p-q}φ^q`.
pub fn compact(m: &Moments, beta: f64) -> Result<Residual> {
    check_beta(beta)?;
    let (p, q, f) = (m.p, m.q, m.mean);
    let b = beta + 1.0;
    let g = g_coeff(p, q, beta);
    let rhs = (-q * b * f.powf(p) + p * b.powf(q) * m.max_mixed) / g;
    Ok(Residual { lhs: m.max_p, rhs })
}

/// The `β = 0` estimate:
/// `∫(Mφ)^p <= f^p - p/(p-q)·f^{p-q}∫φ^q + p/(p-q)·∫(Mφ)^{p-q}φ^q`.
pub fn refined_beta0(m: &Moments) -> Residual {
    let (p, q, f) = (m.p, m.q, m.mean);
    let c = p / (p - q);
    Residual {
        lhs: m.max_p,
        rhs: f.powf(p) - c * f.powf(p - q) * m.q_moment + c * m.max_mixed,
    }
}

/// `∫(Mφ)^p <= F·h^{-1}(k(f,A,F))^p` with all three moments measured.
pub fn lp_lq_upper(m: &Moments) -> Result<Residual> {
    Ok(Residual {
        lhs: m.max_p,
        rhs: upper_bound_three(m.p, m.q, m.mean, m.q_moment, m.p_moment)?,
    })
}

/// `∫(Mφ)^q <= ((β+1)/β)·((β+1)^{q-1}∫φ^q - f^q)/(q-1)`.
pub fn q_maximal(m: &Moments, beta: f64) -> Result<Residual> {
    check_beta(beta)?;
    let (q, f) = (m.q, m.mean);
    let b = beta + 1.0;
    Ok(Residual {
        lhs: m.max_q,
        rhs: b / beta * (b.powf(q - 1.0) * m.q_moment - f.powf(q)) / (q - 1.0),
    })
}

/// `∫(Mφ)^p <= F·ω_p(f^p/F)^p`, the two-variable Bellman value.
///
/// A measured `F` that falls below `f^p` by rounding only (constant `φ`) is
/// raised to `f^p`.
pub fn bellman_two_bound(m: &Moments) -> Result<Residual> {
    let fp = m.mean.powf(m.p);
    let big_f = if m.p_moment < fp && m.p_moment >= fp * (1.0 - ROUNDING_SLACK) {
        fp
    } else {
        m.p_moment
    };
    Ok(Residual {
        lhs: m.max_p,
        rhs: bellman_two(m.p, m.mean, big_f)?,
    })
}

/// Residual of the refined estimate for a step function.
pub fn residual_refined(phi: &StepFunction<'_>, p: f64, q: f64, beta: f64) -> Result<f64> {
    Ok(refined(&Moments::of(phi, p, q)?, beta)?.value())
}

/// Residual of the compact estimate for a step function.
pub fn residual_compact(phi: &StepFunction<'_>, p: f64, q: f64, beta: f64) -> Result<f64> {
    Ok(compact(&Moments::of(phi, p, q)?, beta)?.value())
}

/// Residual of the mixed-moment estimate for a step function.
pub fn residual_mixed_moment(phi: &StepFunction<'_>, p: f64) -> Result<f64> {
    check_p(p)?;
    let max = maximal_function(phi);
    let max_p = mixed_integral_with(phi, &max, p, 0.0)?;
    let max_dual = mixed_integral_with(phi, &max, p - 1.0, 1.0)?;
    Ok((-phi.integral().powf(p) + p * max_dual) / (p - 1.0) - max_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{build_random_tree, SplitLaw, Tree};

    #[test]
    fn constants_are_tight_where_predicted() {
        let tree = Tree::kadic(2, 4).unwrap();
        let c = 1.7f64;
        let phi = StepFunction::constant(&tree, c).unwrap();
        let m = Moments::of(&phi, 3.0, 2.0).unwrap();
        let scale = c.powf(3.0);
        assert!(mixed_moment(&m).value().abs() < 1e-12 * scale);
        assert!(refined_beta0(&m).value().abs() < 1e-12 * scale);
        assert!(lp_lq_upper(&m).unwrap().value().abs() < 1e-12 * scale);
        // ω_p has infinite slope at τ = 1, so rounding in F/f^p shows up at
        // the square-root scale, always on the safe side
        let two = bellman_two_bound(&m).unwrap().value();
        assert!(two >= 0.0 && two < 1e-6 * scale);
        for beta in [0.1, 1.0, 5.0] {
            assert!(refined(&m, beta).unwrap().holds(RESIDUAL_TOLERANCE));
            assert!(compact(&m, beta).unwrap().holds(RESIDUAL_TOLERANCE));
            assert!(q_maximal(&m, beta).unwrap().holds(RESIDUAL_TOLERANCE));
        }
        assert!(residual_mixed_moment(&phi, 3.0).unwrap().abs() < 1e-12 * scale);
    }

    #[test]
    fn beta_must_be_positive() {
        let tree = Tree::kadic(2, 1).unwrap();
        let phi = StepFunction::new(&tree, vec![0.0, 2.0]).unwrap();
        assert!(residual_refined(&phi, 2.0, 1.5, 0.0).is_err());
        assert!(residual_compact(&phi, 2.0, 1.5, -1.0).is_err());
    }

    #[test]
    fn random_functions_satisfy_every_estimate() {
        for seed in 0..40 {
            let tree = build_random_tree(seed, 6, 4, SplitLaw::Uniform).unwrap();
            let phi =
                StepFunction::from_fn(&tree, |l| ((l * 7919 + seed as usize) % 13) as f64).unwrap();
            if phi.integral() == 0.0 {
                continue;
            }
            let m = Moments::of(&phi, 2.0, 1.5).unwrap();
            assert!(mixed_moment(&m).holds(RESIDUAL_TOLERANCE));
            assert!(refined_beta0(&m).holds(RESIDUAL_TOLERANCE));
            assert!(lp_lq_upper(&m).unwrap().holds(RESIDUAL_TOLERANCE));
            for beta in [0.1, 0.5, 1.0, 2.0, 5.0] {
                assert!(refined(&m, beta).unwrap().holds(RESIDUAL_TOLERANCE));
                assert!(compact(&m, beta).unwrap().holds(RESIDUAL_TOLERANCE));
                assert!(q_maximal(&m, beta).unwrap().holds(RESIDUAL_TOLERANCE));
            }
        }
    }
}
