use serde::Serialize;

use super::tangzou::{eval_tangzou, WindowOptions};
use super::theorem::{eval_cor1, eval_cor2, eval_thm1_a, eval_thm1_b};
use super::verdict::{CriterionId, Verdict};
use super::CriteriaError;
use crate::funcspec::{constant_value, extract_bounds, ExtractedBounds};
use crate::simulator::NDDEProblem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOptions {
    /// Bound-extraction horizon; defaults to `[t0, t0 + max(200, 20 * max lag)]`.
    pub horizon: Option<(f64, f64)>,
    pub n_samples: usize,
    pub window: WindowOptions,
    /// Bounds that replace extraction, with their recorded sources.
    pub bounds_override: Option<ExtractedBounds>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            horizon: None,
            n_samples: 100_000,
            window: WindowOptions::default(),
            bounds_override: None,
        }
    }
}

impl CheckOptions {
    pub fn horizon_for(&self, problem: &NDDEProblem) -> (f64, f64) {
        self.horizon.unwrap_or_else(|| {
            let lag = problem.h.declared_max.max(problem.g.declared_max);
            (problem.t0, problem.t0 + (20.0 * lag).max(200.0))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub criterion: CriterionId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub bounds: ExtractedBounds,
    pub verdicts: Vec<Verdict>,
    pub skipped: Vec<Skipped>,
    /// Verdicts computed for a related problem (constant-delay companion) rather than this one.
    pub companion: Vec<CriterionId>,
    /// Some verdict that applies to this problem is satisfied.
    pub certified: bool,
}

impl CheckReport {
    pub fn verdict(&self, id: CriterionId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == id)
    }

    pub fn certifying(&self) -> Vec<CriterionId> {
        self.verdicts
            .iter()
            .filter(|v| v.satisfied && !self.companion.contains(&v.criterion))
            .map(|v| v.criterion)
            .collect()
    }
}

/// Run every applicable criterion on `problem`.
pub fn check_all(problem: &NDDEProblem, opts: &CheckOptions) -> Result<CheckReport, CriteriaError> {
    let bounds = match &opts.bounds_override {
        Some(given) => {
            given.bounds.validate()?;
            given.clone()
        }
        None => extract_bounds(problem, opts.horizon_for(problem), opts.n_samples)?,
    };
    let p = bounds.bounds;
    let mut verdicts = vec![eval_thm1_a(&p), eval_thm1_b(&p)];
    let mut skipped = Vec::new();
    let mut companion = Vec::new();
    let mut skip = |ids: &[CriterionId], reason: &str| {
        for &criterion in ids {
            skipped.push(Skipped {
                criterion,
                reason: reason.to_string(),
            });
        }
    };

    let a_const = constant_value(&problem.a);
    let b_const = constant_value(&problem.b);
    match (a_const, b_const) {
        (Some(a), Some(b)) => {
            let (ca, cb) = eval_cor1(a, b, p.tau, p.sigma, p.h_lag_inf);
            verdicts.push(ca);
            verdicts.push(cb);
        }
        _ => skip(&[CriterionId::Cor1A, CriterionId::Cor1B], "requires constant a and b"),
    }

    if problem.h.is_identity() {
        verdicts.push(eval_cor2(&p));
    } else {
        skip(&[CriterionId::Cor2], "requires h(t) = t");
    }

    let tz = [CriterionId::Tangzou1, CriterionId::Tangzou2];
    match (a_const, problem.g.constant_lag(), problem.h.constant_lag()) {
        (Some(a), Some(sigma), h_lag) if a > 0.0 && a < 1.0 => {
            let tau = h_lag.unwrap_or(p.tau);
            let (v1, v2) = eval_tangzou(a, &problem.b, tau, sigma, &opts.window)?;
            if h_lag.is_some() {
                verdicts.push(v1);
                verdicts.push(v2);
            } else {
                let note = format!(
                    "t-h(t) is not constant: evaluated on the companion with constant lag {tau}; not counted toward certification"
                );
                verdicts.push(v1.with_note(note.clone()));
                verdicts.push(v2.with_note(note));
                companion.extend(tz);
            }
        }
        (Some(a), Some(_), _) => skip(&tz, &format!("requires 0 < a < 1, got a = {a}")),
        _ => skip(&tz, "requires constant a and constant lag t-g(t)"),
    }

    let certified = verdicts
        .iter()
        .any(|v| v.satisfied && !companion.contains(&v.criterion));
    Ok(CheckReport {
        bounds,
        verdicts,
        skipped,
        companion,
        certified,
    })
}
