//! The extremal family `φ_α` on the selected subfamily `S_α` of a k-adic tree.
//!
//! With `α = j/k`, every selected node of rank `m` carries `y = fγ^m` as its
//! average and its atom carries the constant `v = y/z`. All functionals are
//! geometric series in the rank; they are reported both as truncated
//! atom-wise sums and in closed form, with the remainder past the truncation
//! rank kept as an explicit tail.

mod residuals;
mod sharpness;

pub use residuals::{
    bellman_two_bound, compact, lp_lq_upper, mixed_moment, q_maximal, refined, refined_beta0,
    residual_compact, residual_mixed_moment, residual_refined, Residual, RESIDUAL_TOLERANCE,
};
pub use sharpness::{sharpness_report, sharpness_report_with, SharpnessReport, SharpnessRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maximal::{maximal_function, Moments};
use crate::scalars::{check_mean, check_pq, solve_z, RootConfig};
use crate::trees::{ExplicitExpansion, LeafRole, QuotientTree, StepFunction, DEFAULT_NODE_BUDGET};

/// Default truncation: the largest geometric ratio raised to the rank `M`
/// falls below this.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-10;

/// Neumaier-compensated sum; the series here run to ~1e5 terms.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for t in terms {
        let next = sum + t;
        carry += if sum.abs() >= t.abs() {
            (sum - next) + t
        } else {
            (t - next) + sum
        };
        sum = next;
    }
    sum + carry
}

/// Parameters of `φ_α`, parameterized by `z = β + 1 - βα`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremizerParams {
    pub p: f64,
    pub q: f64,
    pub mean: f64,
    pub k: usize,
    pub j: usize,
    pub z: f64,
    /// Truncation rank; `None` picks [`ExtremizerParams::default_max_rank`].
    pub max_rank: Option<usize>,
}

impl ExtremizerParams {
    pub fn from_z(p: f64, q: f64, mean: f64, k: usize, j: usize, z: f64) -> Result<Self> {
        let params = ExtremizerParams {
            p,
            q,
            mean,
            k,
            j,
            z,
            max_rank: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn from_beta(p: f64, q: f64, mean: f64, k: usize, j: usize, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::domain(format!("requires beta >= 0, got {beta}")));
        }
        let alpha = j as f64 / k as f64;
        Self::from_z(p, q, mean, k, j, beta + 1.0 - beta * alpha)
    }

    pub fn with_max_rank(mut self, max_rank: usize) -> Self {
        self.max_rank = Some(max_rank);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_pq(self.p, self.q)?;
        check_mean(self.mean)?;
        if self.k < 2 || self.j < 1 || self.j >= self.k {
            return Err(Error::argument(format!(
                "need 1 <= j < k with k >= 2, got k={}, j={}",
                self.k, self.j
            )));
        }
        if !(self.z >= 1.0) || !self.z.is_finite() {
            return Err(Error::domain(format!(
                "requires z >= 1, got z = {}",
                self.z
            )));
        }
        for (name, s) in [("q", self.q), ("p", self.p)] {
            if !(self.ratio_ln(s) < 0.0) {
                return Err(Error::domain(format!(
                    "requires gamma^{name} (1 - alpha) < 1, got gamma = {}, alpha = {}",
                    self.gamma(),
                    self.alpha()
                )));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.j as f64 / self.k as f64
    }

    /// `β = (z-1)/(1-α)`.
    pub fn beta(&self) -> f64 {
        (self.z - 1.0) / (1.0 - self.alpha())
    }

    /// `ln γ` with `γ = (z-α)/(z(1-α)) = (β+1)/z`.
    pub fn gamma_ln(&self) -> f64 {
        let alpha = self.alpha();
        (-alpha / self.z).ln_1p() - (-alpha).ln_1p()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_ln().exp()
    }

    /// `λ = f α^{1/q} / z`, equal to `f α^{-1/q'} (1 - γ(1-α))`.
    pub fn lambda(&self) -> f64 {
        self.mean * self.alpha().powf(1.0 / self.q) / self.z
    }

    /// `ln(γ^s (1-α))`, the log-ratio of a series of order `s`.
    pub fn ratio_ln(&self, s: f64) -> f64 {
        s * self.gamma_ln() + (-self.alpha()).ln_1p()
    }

    /// Smallest `M` with `(γ^p(1-α))^M <= DEFAULT_TAIL_TARGET`.
    pub fn default_max_rank(&self) -> usize {
        (DEFAULT_TAIL_TARGET.ln() / self.ratio_ln(self.p))
            .ceil()
            .max(1.0) as usize
    }

    pub fn resolved_max_rank(&self) -> usize {
        self.max_rank.unwrap_or_else(|| self.default_max_rank())
    }

    /// `Σ_m α(1-α)^m y_m^s v_m^t` summed to infinity.
    pub fn series_closed_form(&self, s: f64, t: f64) -> f64 {
        self.alpha() * self.mean.powf(s + t) * self.z.powf(-t) / -self.ratio_ln(s + t).exp_m1()
    }

    /// `∫φ_α^p`, `α f^p (1-α)^{p-1} / (z^p(1-α)^{p-1} - (z-α)^p)`.
    pub fn p_moment(&self) -> f64 {
        self.series_closed_form(0.0, self.p)
    }

    /// `∫φ_α^q`, `λ^q / (1 - γ^q(1-α))`.
    pub fn q_moment(&self) -> f64 {
        self.series_closed_form(0.0, self.q)
    }

    /// `∫(M_T φ_α)^p`, `α f^p / (1 - γ^p(1-α))`.
    pub fn max_p(&self) -> f64 {
        self.series_closed_form(self.p, 0.0)
    }
}

/// The `z` solving `f^q α(1-α)^{q-1} / ((1-α)^{q-1} z^q - (z-α)^q) = A`.
pub fn solve_z_for_a(
    q: f64,
    alpha: f64,
    mean: f64,
    q_moment: f64,
    cfg: &RootConfig,
) -> Result<f64> {
    check_mean(mean)?;
    let fq = mean.powf(q);
    if !(q_moment > fq) || !q_moment.is_finite() {
        return Err(Error::domain(format!(
            "requires f^q < A, got f^q = {fq}, A = {q_moment}"
        )));
    }
    solve_z(q, alpha, fq / q_moment, cfg)
}

/// Values carried by every selected node of one rank.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankValues {
    pub rank: usize,
    /// `x_I = λγ^m μ(I)^{1/q}` for one node of this rank (may underflow).
    pub x: f64,
    /// `y_I = fγ^m`.
    pub y: f64,
    /// `v_I = x_I / a_I^{1/q} = y_I / z`, the value of `φ_α` on the atom.
    pub atom_value: f64,
}

/// One functional of `φ_α`, summed three ways.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// Atom-wise sum over ranks `0..M`.
    pub numeric: f64,
    /// Closed form of the same partial sum.
    pub partial: f64,
    /// Closed-form remainder over ranks `M..`.
    pub tail: f64,
    /// Closed form of the full series.
    pub closed_form: f64,
}

impl Series {
    pub fn total(&self) -> f64 {
        self.numeric + self.tail
    }

    /// `|numeric - partial| / |partial|`.
    pub fn truncation_gap(&self) -> f64 {
        (self.numeric - self.partial).abs() / self.partial.abs()
    }
}

/// `M_T φ_α` on the atoms of one rank, with the bounds `y ≤ value < γy`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomMaximal {
    pub rank: usize,
    pub value: f64,
    pub y: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct ExtremizerRealization {
    params: ExtremizerParams,
    quotient: QuotientTree,
    ranks: Vec<RankValues>,
    maximal: Vec<AtomMaximal>,
}

/// `φ_α` on an explicit tree, for cross-checking against [`crate::maximal`].
#[derive(Clone, Debug)]
pub struct ExplicitRealization {
    pub expansion: ExplicitExpansion,
    pub values: Vec<f64>,
}

impl ExplicitRealization {
    pub fn step_function(&self) -> StepFunction<'_> {
        StepFunction::new(&self.expansion.tree, self.values.clone())
            .expect("realization values are finite and nonnegative")
    }
}

/// Explicit-tree functionals next to their quotient counterparts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitCheck {
    /// Largest `|M_T φ(leaf) / y_rank - 1|` over atom leaves.
    pub maximal_rel_err: f64,
    /// `(explicit atom sum + tail, quotient total)` per functional.
    pub mean: (f64, f64),
    pub q_moment: (f64, f64),
    pub p_moment: (f64, f64),
    pub max_p: (f64, f64),
}

impl ExplicitCheck {
    pub fn worst_rel_err(&self) -> f64 {
        [self.mean, self.q_moment, self.p_moment, self.max_p]
            .iter()
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(self.maximal_rel_err, f64::max)
    }
}

/// Builds `φ_α` on `s`, which must be built for the same `k`, `j`.
pub fn build_phi_alpha(
    s: &QuotientTree,
    params: &ExtremizerParams,
) -> Result<ExtremizerRealization> {
    params.validate()?;
    if s.k() != params.k || s.j() != params.j {
        return Err(Error::argument(format!(
            "quotient tree has k={}, j={} but parameters have k={}, j={}",
            s.k(),
            s.j(),
            params.k,
            params.j
        )));
    }
    let gamma_ln = params.gamma_ln();
    let lambda_ln = params.lambda().ln();
    let k_ln = (params.k as f64).ln();
    let ranks: Vec<RankValues> = (0..=s.max_rank())
        .map(|rank| {
            let m = rank as f64;
            let y = params.mean * (m * gamma_ln).exp();
            RankValues {
                rank,
                x: (lambda_ln + m * gamma_ln - m * k_ln / params.q).exp(),
                y,
                atom_value: y / params.z,
            }
        })
        .collect();
    let maximal = maximal_on_ranks(s, &ranks, params.alpha(), gamma_ln.exp());
    Ok(ExtremizerRealization {
        params: *params,
        quotient: s.clone(),
        ranks,
        maximal,
    })
}

// Node averages from the backward recursion T_m = αv_m + (1-α)T_{m+1}, with
// the closed-off tail nodes constant at y_M; then a running max down the chain.
fn maximal_on_ranks(
    s: &QuotientTree,
    ranks: &[RankValues],
    alpha: f64,
    gamma: f64,
) -> Vec<AtomMaximal> {
    let max_rank = s.max_rank();
    let mut averages = vec![0.0; max_rank + 1];
    averages[max_rank] = ranks[max_rank].y;
    for m in (0..max_rank).rev() {
        averages[m] = alpha * ranks[m].atom_value + (1.0 - alpha) * averages[m + 1];
    }
    let mut chain_max = 0.0f64;
    (0..max_rank)
        .map(|m| {
            chain_max = chain_max.max(averages[m]);
            let y = ranks[m].y;
            AtomMaximal {
                rank: m,
                value: chain_max.max(ranks[m].atom_value),
                y,
                upper: gamma * y,
            }
        })
        .collect()
}

impl ExtremizerRealization {
    /// Builds the quotient tree at the resolved rank and `φ_α` on it.
    pub fn build(params: &ExtremizerParams) -> Result<Self> {
        params.validate()?;
        let s = QuotientTree::build(params.k, params.j, params.resolved_max_rank())?;
        build_phi_alpha(&s, params)
    }

    pub fn params(&self) -> &ExtremizerParams {
        &self.params
    }

    pub fn quotient(&self) -> &QuotientTree {
        &self.quotient
    }

    pub fn max_rank(&self) -> usize {
        self.quotient.max_rank()
    }

    pub fn ranks(&self) -> &[RankValues] {
        &self.ranks
    }

    /// `M_T φ_α` on the atoms of ranks `0..M`.
    pub fn maximal_on_quotient(&self) -> &[AtomMaximal] {
        &self.maximal
    }

    /// `∫(M_T φ_α)^s φ_α^t`, the maximal function taken from
    /// [`Self::maximal_on_quotient`].
    pub fn series(&self, s: f64, t: f64) -> Series {
        let levels = self.quotient.levels();
        let numeric = compensated_sum(self.maximal.iter().map(|a| {
            let v = self.ranks[a.rank].atom_value;
            levels[a.rank].atom_mass * a.value.powf(s) * v.powf(t)
        }));
        let closed_form = self.params.series_closed_form(s, t);
        let tail_ln = self.max_rank() as f64 * self.params.ratio_ln(s + t);
        Series {
            numeric,
            partial: closed_form * -tail_ln.exp_m1(),
            tail: closed_form * tail_ln.exp(),
            closed_form,
        }
    }

    pub fn mean(&self) -> Series {
        self.series(0.0, 1.0)
    }

    pub fn q_moment(&self) -> Series {
        self.series(0.0, self.params.q)
    }

    pub fn p_moment(&self) -> Series {
        self.series(0.0, self.params.p)
    }

    pub fn max_p(&self) -> Series {
        self.series(self.params.p, 0.0)
    }

    /// All moments, each as truncated atom sum plus analytic tail.
    pub fn moments(&self) -> Moments {
        let (p, q) = (self.params.p, self.params.q);
        Moments {
            p,
            q,
            mean: self.mean().total(),
            q_moment: self.q_moment().total(),
            p_moment: self.p_moment().total(),
            max_p: self.max_p().total(),
            max_q: self.series(q, 0.0).total(),
            max_mixed: self.series(p - q, q).total(),
            max_dual: self.series(p - 1.0, 1.0).total(),
        }
    }

    /// All moments in closed form.
    pub fn closed_form_moments(&self) -> Moments {
        let pr = &self.params;
        let (p, q) = (pr.p, pr.q);
        Moments {
            p,
            q,
            mean: pr.series_closed_form(0.0, 1.0),
            q_moment: pr.series_closed_form(0.0, q),
            p_moment: pr.series_closed_form(0.0, p),
            max_p: pr.series_closed_form(p, 0.0),
            max_q: pr.series_closed_form(q, 0.0),
            max_mixed: pr.series_closed_form(p - q, q),
            max_dual: pr.series_closed_form(p - 1.0, 1.0),
        }
    }

    /// Writes `φ_α` out on an explicit tree; tail nodes hold `y_M`, which
    /// preserves every node average of the untruncated function.
    pub fn explicit(&self, budget: usize) -> Result<ExplicitRealization> {
        let expansion = self.quotient.expand(budget)?;
        let tail_value = self.ranks[self.max_rank()].y;
        let values = expansion
            .roles
            .iter()
            .map(|role| match *role {
                LeafRole::Atom { rank } => self.ranks[rank].atom_value,
                LeafRole::Tail { .. } => tail_value,
            })
            .collect();
        Ok(ExplicitRealization { expansion, values })
    }

    /// Runs the explicit tree through [`maximal_function`] and compares
    /// atom-region sums plus analytic tails with the quotient totals.
    pub fn explicit_check(&self) -> Result<ExplicitCheck> {
        self.explicit_check_with_budget(DEFAULT_NODE_BUDGET)
    }

    pub fn explicit_check_with_budget(&self, budget: usize) -> Result<ExplicitCheck> {
        let explicit = self.explicit(budget)?;
        let phi = explicit.step_function();
        let max = maximal_function(&phi);
        let tree = phi.tree();
        let (p, q) = (self.params.p, self.params.q);
        let mut maximal_rel_err = 0.0f64;
        let mut sums = [0.0f64; 4];
        for (pos, role) in explicit.expansion.roles.iter().enumerate() {
            let LeafRole::Atom { rank } = *role else {
                continue;
            };
            let mu = tree.measure(tree.leaves()[pos]);
            let v = phi.values()[pos];
            let mv = max.values()[pos];
            maximal_rel_err = maximal_rel_err.max((mv / self.ranks[rank].y - 1.0).abs());
            sums[0] += mu * v;
            sums[1] += mu * v.powf(q);
            sums[2] += mu * v.powf(p);
            sums[3] += mu * mv.powf(p);
        }
        let pair = |sum: f64, series: Series| (sum + series.tail, series.total());
        Ok(ExplicitCheck {
            maximal_rel_err,
            mean: pair(sums[0], self.mean()),
            q_moment: pair(sums[1], self.q_moment()),
            p_moment: pair(sums[2], self.p_moment()),
            max_p: pair(sums[3], self.max_p()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(terms), 2e-16);
    }

    #[test]
    fn guards_name_the_failed_inequality() {
        // β large with α = 1/2 drives γ^p(1-α) above 1
        let err = ExtremizerParams::from_beta(3.0, 2.0, 1.0, 2, 1, 5.0).unwrap_err();
        assert!(err.to_string().contains("(1 - alpha) < 1"), "{err}");
        assert!(ExtremizerParams::from_z(3.0, 2.0, 1.0, 2, 1, 0.5).is_err());
        assert!(ExtremizerParams::from_z(3.0, 2.0, 1.0, 2, 2, 1.1).is_err());
    }

    #[test]
    fn lambda_forms_agree() {
        let pr = ExtremizerParams::from_beta(2.0, 1.5, 1.3, 16, 1, 0.7).unwrap();
        let (alpha, q) = (pr.alpha(), pr.q);
        let q_conj = q / (q - 1.0);
        let other = pr.mean * alpha.powf(-1.0 / q_conj) * (1.0 - pr.gamma() * (1.0 - alpha));
        assert!((pr.lambda() - other).abs() < 1e-14);
        assert!((pr.gamma() - (pr.beta() + 1.0) / pr.z).abs() < 1e-14);
    }

    #[test]
    fn construction_identities() {
        let pr = ExtremizerParams::from_beta(2.0, 1.5, 1.0, 4, 1, 0.6).unwrap();
        let r = ExtremizerRealization::build(&pr).unwrap();
        let gamma = pr.gamma();
        for (rv, level) in r.ranks().iter().zip(r.quotient().levels()).take(60) {
            let m = rv.rank as i32;
            let mu = 4f64.powi(-m);
            let x = pr.lambda() * gamma.powi(m) * mu.powf(1.0 / pr.q);
            assert!((rv.x / x - 1.0).abs() < 1e-13);
            assert!((rv.y / (pr.mean * gamma.powi(m)) - 1.0).abs() < 1e-13);
            assert!(
                (rv.atom_value - rv.x / (pr.alpha() * mu).powf(1.0 / pr.q)).abs() < 1e-13 * rv.y
            );
            assert!((level.mass / 0.75f64.powi(m) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn series_agree_with_closed_forms() {
        let pr = ExtremizerParams::from_beta(3.0, 2.0, 0.8, 16, 3, 0.3).unwrap();
        let r = ExtremizerRealization::build(&pr).unwrap();
        for s in [r.mean(), r.q_moment(), r.p_moment(), r.max_p()] {
            assert!(s.truncation_gap() < 1e-12, "{s:?}");
            assert!((s.total() / s.closed_form - 1.0).abs() < 1e-12);
        }
        assert!((r.mean().closed_form - 0.8).abs() < 1e-14);
        let zp = pr.z.powf(pr.p) * pr.p_moment();
        assert!((r.max_p().total() / zp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beta_zero_is_constant() {
        let pr = ExtremizerParams::from_beta(2.0, 1.5, 1.4, 8, 1, 0.0).unwrap();
        let r = ExtremizerRealization::build(&pr).unwrap();
        assert!(r
            .ranks()
            .iter()
            .all(|rv| (rv.atom_value - 1.4).abs() < 1e-15));
        assert!(r
            .maximal_on_quotient()
            .iter()
            .all(|a| (a.value - 1.4).abs() < 1e-13));
        assert!((r.p_moment().total() - 1.4f64.powf(2.0)).abs() < 1e-12);
    }

    #[test]
    fn sandwich_with_lower_bound_attained() {
        let pr = ExtremizerParams::from_beta(2.0, 1.5, 1.0, 64, 1, 0.73).unwrap();
        let r = ExtremizerRealization::build(&pr).unwrap();
        for a in r.maximal_on_quotient() {
            assert!(a.value >= a.y * (1.0 - 1e-12) && a.value < a.upper);
            assert!((a.value / a.y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_tree_reproduces_quotient() {
        for m in 1..=5 {
            let pr = ExtremizerParams::from_beta(2.0, 1.5, 1.0, 2, 1, 0.3)
                .unwrap()
                .with_max_rank(m);
            let r = ExtremizerRealization::build(&pr).unwrap();
            let check = r.explicit_check().unwrap();
            assert!(check.worst_rel_err() < 1e-12, "M={m}: {check:?}");
        }
    }

    #[test]
    fn z_for_a_targets_the_q_moment() {
        let cfg = RootConfig::default();
        let alpha = 1.0 / 16.0;
        let z = solve_z_for_a(1.5, alpha, 1.0, 1.2, &cfg).unwrap();
        let pr = ExtremizerParams::from_z(2.0, 1.5, 1.0, 16, 1, z).unwrap();
        assert!((pr.q_moment() - 1.2).abs() < 1e-12);
        assert!(solve_z_for_a(1.5, alpha, 1.0, 0.9, &cfg).is_err());
    }
}
