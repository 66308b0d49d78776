//! Bracketed bisection for the monotone scalar inversions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bracketing {
    /// Use the bracket as given; fail if it does not straddle a root.
    Fixed,
    /// Grow the upper end geometrically until it straddles a root.
    Expanding,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    /// Largest acceptable width of the final bracket.
    pub abs_tol: f64,
    /// Cap on bisection steps, and separately on bracket expansions.
    pub max_iter: usize,
    pub bracketing: Bracketing,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            abs_tol: 1e-12,
            max_iter: 200,
            bracketing: Bracketing::Expanding,
        }
    }
}

impl RootConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        RootConfig {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::argument(format!(
                "root tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::argument("root solver needs at least one iteration"));
        }
        Ok(())
    }
}

/// Finds a sign change of `g` on `[lo, hi]`.
///
/// Bisection continues until the bracket can no longer be split in floating
/// point, then returns whichever end has the smaller `|g|`. The final bracket
/// must be narrower than `cfg.abs_tol`.
pub(crate) fn bisect(
    solver: &'static str,
    g: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    cfg.validate()?;
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.is_nan() || g_hi.is_nan() || g_lo.signum() == g_hi.signum() {
        return Err(Error::Numeric {
            solver,
            iterations: 0,
            lo,
            hi,
            residual: g_lo.abs().min(g_hi.abs()),
        });
    }
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    if hi - lo > cfg.abs_tol {
        return Err(Error::Numeric {
            solver,
            iterations,
            lo,
            hi,
            residual: g_lo.abs().min(g_hi.abs()),
        });
    }
    Ok(if g_lo.abs() <= g_hi.abs() { lo } else { hi })
}

/// Grows `hi` (doubling the distance from `lo`) until `g(hi)` has the
/// opposite sign of `g(lo)`.
pub(crate) fn expand_upper(
    solver: &'static str,
    g: impl Fn(f64) -> f64,
    lo: f64,
    mut hi: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    let sign_lo = g(lo).signum();
    let mut g_hi = g(hi);
    if cfg.bracketing == Bracketing::Fixed {
        return Ok(hi);
    }
    for _ in 0..cfg.max_iter {
        if g_hi == 0.0 || g_hi.signum() != sign_lo {
            return Ok(hi);
        }
        hi = lo + 2.0 * (hi - lo);
        g_hi = g(hi);
    }
    Err(Error::Numeric {
        solver,
        iterations: cfg.max_iter,
        lo,
        hi,
        residual: g_hi.abs(),
    })
}
