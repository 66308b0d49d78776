//! Randomized verification of every sharp inequality on generated step
//! functions, with worst-case residuals and replayable failure descriptors.

mod probe;
mod sample;

pub use probe::{near_extremal_probe, ProbeRow};
pub use sample::{sample_rng, Sample, TreeFamily, TreeShape, ValueLaw};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremizer::{
    bellman_two_bound, compact, lp_lq_upper, mixed_moment, q_maximal, refined, refined_beta0,
    Residual, RESIDUAL_TOLERANCE,
};
use crate::maximal::{maximal_function, weak_type_with, Moments};
use crate::scalars::ROUNDING_SLACK;
use crate::trees::StepFunction;

/// Largest number of levels `λ` at which the weak-type estimate is checked
/// per sample.
pub const WEAK_TYPE_LEVELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// `∫(Mφ)^p <= -f^p/(p-1) + p/(p-1)∫φ(Mφ)^{p-1}`.
    MixedMoment,
    /// The refined estimate with weight `β`, one entry per grid value.
    Refined,
    /// The compact estimate with weight `β`.
    Compact,
    /// `μ(Mφ >= λ) <= (1/λ)∫_{Mφ >= λ} φ`.
    WeakType,
    /// The refined estimate at `β = 0`.
    RefinedBeta0,
    /// The upper bound from all three moments.
    LpLqUpper,
    /// The `q`-maximal estimate with weight `β`.
    QMaximal,
    /// The two-variable Bellman value as a one-sided bound.
    BellmanTwo,
}

impl Inequality {
    pub const ALL: [Inequality; 8] = [
        Inequality::MixedMoment,
        Inequality::Refined,
        Inequality::Compact,
        Inequality::WeakType,
        Inequality::RefinedBeta0,
        Inequality::LpLqUpper,
        Inequality::QMaximal,
        Inequality::BellmanTwo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Inequality::MixedMoment => "mixed-moment",
            Inequality::Refined => "refined",
            Inequality::Compact => "compact",
            Inequality::WeakType => "weak-type",
            Inequality::RefinedBeta0 => "refined-beta0",
            Inequality::LpLqUpper => "lp-lq-upper",
            Inequality::QMaximal => "q-maximal",
            Inequality::BellmanTwo => "bellman-two",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.name() == name)
            .ok_or_else(|| Error::argument(format!("unknown inequality '{name}'")))
    }

    pub fn uses_beta(&self) -> bool {
        matches!(
            self,
            Inequality::Refined | Inequality::Compact | Inequality::QMaximal
        )
    }

    pub fn uses_pq(&self) -> bool {
        !matches!(self, Inequality::WeakType)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationPlan {
    pub seed: u64,
    /// Samples per value law.
    pub samples: usize,
    pub trees: TreeFamily,
    pub min_depth: u32,
    pub max_depth: u32,
    pub value_laws: Vec<ValueLaw>,
    pub pq_grid: Vec<(f64, f64)>,
    pub betas: Vec<f64>,
    pub inequalities: Vec<Inequality>,
    /// Scaled residuals below `-tolerance` are failures.
    pub tolerance: f64,
}

impl Default for VerificationPlan {
    fn default() -> Self {
        VerificationPlan {
            seed: 1,
            samples: 500,
            trees: TreeFamily::Kadic { k: 2 },
            min_depth: 10,
            max_depth: 10,
            value_laws: vec![
                ValueLaw::Uniform,
                ValueLaw::LogNormal,
                ValueLaw::SparseSpikes,
            ],
            pq_grid: vec![(2.0, 1.5), (3.0, 2.0), (1.5, 1.2)],
            betas: vec![0.1, 0.5, 1.0, 2.0, 5.0],
            inequalities: Inequality::ALL.to_vec(),
            tolerance: RESIDUAL_TOLERANCE,
        }
    }
}

/// Which check a residual came from; with the plan, enough to recompute it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseDescriptor {
    pub seed: u64,
    pub law: ValueLaw,
    pub law_index: usize,
    pub sample: usize,
    pub shape: TreeShape,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub beta: Option<f64>,
    /// Position of `λ` among the levels checked for the weak-type estimate.
    pub level: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityStats {
    pub name: String,
    pub inequality: Inequality,
    pub beta: Option<f64>,
    pub checks: u64,
    pub failures: u64,
    /// Checks that could not be evaluated (counted as failures).
    pub errors: u64,
    /// Most negative `residual / (1 + |rhs|)`.
    pub worst_scaled: f64,
    pub worst: Option<Residual>,
    pub argmin: Option<CaseDescriptor>,
    pub first_error: Option<CaseDescriptor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub plan: VerificationPlan,
    pub stats: Vec<InequalityStats>,
}

impl VerificationReport {
    pub fn total_checks(&self) -> u64 {
        self.stats.iter().map(|s| s.checks).sum()
    }

    pub fn total_failures(&self) -> u64 {
        self.stats.iter().map(|s| s.failures + s.errors).sum()
    }

    pub fn passed(&self) -> bool {
        self.total_failures() == 0
    }

    pub fn get(&self, name: &str) -> Option<&InequalityStats> {
        self.stats.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per inequality entry.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            inequality: &'a str,
            checks: u64,
            failures: u64,
            errors: u64,
            worst_scaled: f64,
            worst_residual: Option<f64>,
            argmin_law: Option<&'static str>,
            argmin_sample: Option<usize>,
            argmin_p: Option<f64>,
            argmin_q: Option<f64>,
            argmin_beta: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(out);
        for s in &self.stats {
            let a = s.argmin.as_ref();
            w.serialize(Row {
                inequality: &s.name,
                checks: s.checks,
                failures: s.failures,
                errors: s.errors,
                worst_scaled: s.worst_scaled,
                worst_residual: s.worst.map(|r| r.value()),
                argmin_law: a.map(|d| d.law.name()),
                argmin_sample: a.map(|d| d.sample),
                argmin_p: a.and_then(|d| d.p),
                argmin_q: a.and_then(|d| d.q),
                argmin_beta: a.and_then(|d| d.beta),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_summary_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

impl VerificationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::argument("a plan needs at least one sample"));
        }
        if self.value_laws.is_empty() {
            return Err(Error::argument("a plan needs at least one value law"));
        }
        if self.inequalities.is_empty() {
            return Err(Error::argument("a plan needs at least one inequality"));
        }
        if self.min_depth < 1 || self.min_depth > self.max_depth {
            return Err(Error::argument(format!(
                "depth bounds must satisfy 1 <= min <= max, got {}..={}",
                self.min_depth, self.max_depth
            )));
        }
        match self.trees {
            TreeFamily::Kadic { k } if k < 2 => {
                return Err(Error::argument(format!(
                    "k-adic trees need k >= 2, got {k}"
                )))
            }
            TreeFamily::Random { max_children } if max_children < 2 => {
                return Err(Error::argument("random trees need max_children >= 2"))
            }
            _ => {}
        }
        let needs_pq = self.inequalities.iter().any(Inequality::uses_pq);
        if needs_pq && self.pq_grid.is_empty() {
            return Err(Error::argument("the selected inequalities need a p-q grid"));
        }
        for &(p, q) in &self.pq_grid {
            if !(q > 1.0 && p > q && p.is_finite()) {
                return Err(Error::argument(format!(
                    "grid point needs 1 < q < p, got ({p}, {q})"
                )));
            }
        }
        if self.inequalities.iter().any(Inequality::uses_beta) && self.betas.is_empty() {
            return Err(Error::argument(
                "the selected inequalities need a beta grid",
            ));
        }
        for &b in &self.betas {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::argument(format!(
                    "beta grid values must be positive (beta = 0 is the refined-beta0 check), got {b}"
                )));
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::argument("tolerance must be nonnegative"));
        }
        Ok(())
    }

    /// Report entries in a fixed order: selection order, then `β` order.
    fn slots(&self) -> Vec<(Inequality, Option<f64>)> {
        let mut out = Vec::new();
        for &ineq in &self.inequalities {
            if ineq.uses_beta() {
                out.extend(self.betas.iter().map(|&b| (ineq, Some(b))));
            } else {
                out.push((ineq, None));
            }
        }
        out
    }

    /// Regenerates the sample behind a descriptor.
    pub fn sample(&self, law_index: usize, index: usize) -> Result<Sample> {
        let law = *self
            .value_laws
            .get(law_index)
            .ok_or_else(|| Error::argument(format!("no value law at index {law_index}")))?;
        let mut rng = sample_rng(self.seed, law_index, index);
        sample::draw_sample(
            &mut rng,
            self.trees,
            (self.min_depth, self.max_depth),
            law,
            index,
        )
    }
}

fn slot_name(ineq: Inequality, beta: Option<f64>) -> String {
    match beta {
        Some(b) => format!("{}[beta={b}]", ineq.name()),
        None => ineq.name().to_string(),
    }
}

/// Levels `λ > f` where `μ(Mφ >= λ)` jumps, thinned to at most
/// [`WEAK_TYPE_LEVELS`] evenly spaced picks. Values within rounding of `f`
/// are not levels above it.
fn weak_type_levels(max: &StepFunction<'_>, mean: f64) -> Vec<f64> {
    let floor = mean + ROUNDING_SLACK * (1.0 + mean);
    let mut levels: Vec<f64> = max
        .values()
        .iter()
        .copied()
        .filter(|&v| v > floor)
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() <= WEAK_TYPE_LEVELS {
        return levels;
    }
    let step = (levels.len() - 1) as f64 / (WEAK_TYPE_LEVELS - 1) as f64;
    (0..WEAK_TYPE_LEVELS)
        .map(|i| levels[(i as f64 * step).round() as usize])
        .collect()
}

struct Outcome {
    slot: usize,
    residual: Result<Residual>,
    case: CaseDescriptor,
}

fn evaluate_sample(
    plan: &VerificationPlan,
    slots: &[(Inequality, Option<f64>)],
    law_index: usize,
    index: usize,
) -> Result<Vec<Outcome>> {
    let sample = plan.sample(law_index, index)?;
    let phi = sample.step_function();
    let max = maximal_function(&phi);
    let mean = phi.integral();
    let base = CaseDescriptor {
        seed: plan.seed,
        law: plan.value_laws[law_index],
        law_index,
        sample: index,
        shape: sample.shape,
        p: None,
        q: None,
        beta: None,
        level: None,
    };
    let mut out = Vec::new();
    let moments: Vec<Result<Moments>> = plan
        .pq_grid
        .iter()
        .map(|&(p, q)| Moments::of(&phi, p, q))
        .collect();
    for (slot, &(ineq, beta)) in slots.iter().enumerate() {
        if ineq == Inequality::WeakType {
            for (level, lambda) in weak_type_levels(&max, mean).into_iter().enumerate() {
                let residual = weak_type_with(&phi, &max, lambda).map(|w| Residual {
                    lhs: w.measure,
                    rhs: w.bound,
                });
                out.push(Outcome {
                    slot,
                    residual,
                    case: CaseDescriptor {
                        level: Some(level),
                        ..base
                    },
                });
            }
            continue;
        }
        for (&(p, q), m) in plan.pq_grid.iter().zip(&moments) {
            let residual = match m {
                Err(e) => Err(Error::domain(e.to_string())),
                Ok(m) => match (ineq, beta) {
                    (Inequality::MixedMoment, _) => Ok(mixed_moment(m)),
                    (Inequality::RefinedBeta0, _) => Ok(refined_beta0(m)),
                    (Inequality::LpLqUpper, _) => lp_lq_upper(m),
                    (Inequality::BellmanTwo, _) => bellman_two_bound(m),
                    (Inequality::Refined, Some(b)) => refined(m, b),
                    (Inequality::Compact, Some(b)) => compact(m, b),
                    (Inequality::QMaximal, Some(b)) => q_maximal(m, b),
                    _ => unreachable!("beta-weighted slots always carry a beta"),
                },
            };
            out.push(Outcome {
                slot,
                residual,
                case: CaseDescriptor {
                    p: Some(p),
                    q: Some(q),
                    beta,
                    ..base
                },
            });
        }
    }
    Ok(out)
}

/// Runs every selected check on every generated sample.
///
/// Samples are evaluated in parallel; their outcomes are folded in sample
/// order, so the report does not depend on scheduling.
pub fn run_plan(plan: &VerificationPlan) -> Result<VerificationReport> {
    plan.validate()?;
    let slots = plan.slots();
    let jobs: Vec<(usize, usize)> = (0..plan.value_laws.len())
        .flat_map(|l| (0..plan.samples).map(move |i| (l, i)))
        .collect();
    let outcomes: Vec<Vec<Outcome>> = jobs
        .par_iter()
        .map(|&(l, i)| evaluate_sample(plan, &slots, l, i))
        .collect::<Result<_>>()?;
    let mut stats: Vec<InequalityStats> = slots
        .iter()
        .map(|&(ineq, beta)| InequalityStats {
            name: slot_name(ineq, beta),
            inequality: ineq,
            beta,
            checks: 0,
            failures: 0,
            errors: 0,
            worst_scaled: f64::INFINITY,
            worst: None,
            argmin: None,
            first_error: None,
        })
        .collect();
    for o in outcomes.into_iter().flatten() {
        let s = &mut stats[o.slot];
        s.checks += 1;
        match o.residual {
            Err(_) => {
                s.errors += 1;
                s.first_error.get_or_insert(o.case);
            }
            Ok(r) => {
                let scaled = r.scaled();
                if !r.holds(plan.tolerance) {
                    s.failures += 1;
                }
                if scaled < s.worst_scaled || s.worst.is_none() {
                    s.worst_scaled = scaled;
                    s.worst = Some(r);
                    s.argmin = Some(o.case);
                }
            }
        }
    }
    Ok(VerificationReport {
        plan: plan.clone(),
        stats,
    })
}

/// Recomputes the residual recorded for `case` under `name`.
pub fn replay(plan: &VerificationPlan, name: &str, case: &CaseDescriptor) -> Result<Residual> {
    let slots = plan.slots();
    let slot = slots
        .iter()
        .position(|&(i, b)| slot_name(i, b) == name)
        .ok_or_else(|| Error::argument(format!("plan has no entry '{name}'")))?;
    let outcomes = evaluate_sample(plan, &slots, case.law_index, case.sample)?;
    outcomes
        .into_iter()
        .find(|o| {
            o.slot == slot && o.case.p == case.p && o.case.q == case.q && o.case.level == case.level
        })
        .ok_or_else(|| Error::argument("descriptor does not match any check of its sample"))?
        .residual
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> VerificationPlan {
        VerificationPlan {
            samples: 12,
            trees: TreeFamily::Mixed,
            min_depth: 2,
            max_depth: 6,
            ..VerificationPlan::default()
        }
    }

    #[test]
    fn small_plan_passes_and_is_deterministic() {
        let plan = small_plan();
        let a = run_plan(&plan).unwrap();
        assert!(a.passed(), "{}", a.summary_csv_string().unwrap());
        let b = run_plan(&plan).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        // 3 laws x 12 samples x 3 grid points
        assert_eq!(a.get("refined[beta=0.5]").unwrap().checks, 108);
    }

    #[test]
    fn argmin_replays_exactly() {
        let plan = small_plan();
        let report = run_plan(&plan).unwrap();
        for s in &report.stats {
            let case = s.argmin.unwrap();
            let r = replay(&plan, &s.name, &case).unwrap();
            assert_eq!(
                r.value().to_bits(),
                s.worst.unwrap().value().to_bits(),
                "{}",
                s.name
            );
        }
    }

    #[test]
    fn constants_are_equality_cases() {
        let plan = VerificationPlan {
            value_laws: vec![ValueLaw::Constant],
            ..small_plan()
        };
        let report = run_plan(&plan).unwrap();
        assert!(report.passed(), "{}", report.summary_csv_string().unwrap());
        let mixed = report.get("mixed-moment").unwrap();
        assert!(mixed.worst_scaled.abs() < 1e-12);
        // no level above the mean exists for a constant
        assert_eq!(report.get("weak-type").unwrap().checks, 0);
    }

    #[test]
    fn invalid_plans_are_rejected() {
        let bad = [
            VerificationPlan {
                samples: 0,
                ..VerificationPlan::default()
            },
            VerificationPlan {
                betas: vec![0.0],
                ..VerificationPlan::default()
            },
            VerificationPlan {
                pq_grid: vec![(1.5, 2.0)],
                ..VerificationPlan::default()
            },
            VerificationPlan {
                min_depth: 5,
                max_depth: 3,
                ..VerificationPlan::default()
            },
        ];
        for plan in bad {
            assert!(matches!(run_plan(&plan), Err(Error::Argument(_))));
        }
    }

    #[test]
    fn inequality_names_round_trip() {
        for i in Inequality::ALL {
            assert_eq!(Inequality::parse(i.name()).unwrap(), i);
        }
        assert!(Inequality::parse("nope").is_err());
    }
}
