//! Local-stability tests for the neutral logistic equation
//! `x'(t) = r(t) x(t) (1 - (x(h(t)) - rho x'(g(t))) / K)`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::theorem::{eval_thm1_a, eval_thm1_b, ONE_PLUS_INV_E};
use super::verdict::{CriterionId, Verdict};
use super::CriteriaError;
use crate::funcspec::ParamBounds;

/// Scalar inputs of the logistic tests: `r0 <= r(t) <= R0`, lags bounded by `tau`, `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct LogisticParams {
    pub r0: f64,
    pub R0: f64,
    pub rho: f64,
    pub tau: f64,
    pub sigma: f64,
    pub h_lag_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogisticMode {
    /// The inequalities exactly as printed.
    AsStated,
    /// Linearization `a = rho r`, `b = r` fed to the general test.
    Derived,
}

impl LogisticParams {
    fn check(&self) -> Result<(), CriteriaError> {
        if !(self.r0 > 0.0 && self.r0 <= self.R0) {
            return Err(CriteriaError::InvalidInput(format!(
                "need 0 < r0 <= R0, got r0 = {}, R0 = {}",
                self.r0, self.R0
            )));
        }
        if self.rho < 0.0 {
            return Err(CriteriaError::InvalidInput(format!(
                "rho must be nonnegative, got {}",
                self.rho
            )));
        }
        if self.R0 * self.rho >= 1.0 {
            return Err(CriteriaError::InvalidInput(format!(
                "need R0*rho < 1, got {}",
                self.R0 * self.rho
            )));
        }
        Ok(())
    }

    /// Bounds of the linearized neutral equation.
    pub fn linearized_bounds(&self) -> Result<ParamBounds, CriteriaError> {
        Ok(ParamBounds::new(
            self.r0 * self.rho,
            self.R0 * self.rho,
            self.r0,
            self.R0,
            self.tau,
            self.sigma,
            self.h_lag_inf,
        )?)
    }
}

/// Evaluate parts (a) and (b) of the logistic theorem in the requested mode.
pub fn eval_logistic_thm(p: &LogisticParams, mode: LogisticMode) -> Result<(Verdict, Verdict), CriteriaError> {
    p.check()?;
    match mode {
        LogisticMode::Derived => {
            let lin = p.linearized_bounds()?;
            let note = "linearization a(t) = rho*r(t), b(t) = r(t)";
            Ok((
                eval_thm1_a(&lin).relabel(CriterionId::LogThmADerived).with_note(note),
                eval_thm1_b(&lin).relabel(CriterionId::LogThmBDerived).with_note(note),
            ))
        }
        LogisticMode::AsStated => {
            let (r0, big_r, rho) = (p.r0, p.R0, p.rho);
            let lhs = if p.sigma == 0.0 {
                p.tau * big_r * rho
            } else {
                p.tau * big_r * rho + p.sigma * big_r * big_r * rho * (1.0 - r0) / ((1.0 - big_r).powi(2) * r0)
            };
            let rate_ok = big_r < 1.0;
            let floor = (1.0 - big_r) / (E * big_r * rho);
            let lag_ok = p.h_lag_inf >= floor;

            let mut a = Verdict::new(CriterionId::LogThmA, lhs, 1.0 - big_r, rate_ok);
            let mut b = Verdict::new(
                CriterionId::LogThmB,
                lhs,
                ONE_PLUS_INV_E * (1.0 - big_r),
                rate_ok && lag_ok,
            );
            let note = "as printed; mapping differs from the linearization, not counted toward certification";
            a = a.with_note(note);
            b = b.with_note(note);
            if !rate_ok {
                let msg = format!("printed right side 1-R0 = {} is nonpositive", 1.0 - big_r);
                a = a.with_note(msg.clone());
                b = b.with_note(msg);
            }
            if !lag_ok {
                b = b.with_note(format!(
                    "lag precondition fails: inf(t-h(t)) = {} < (1-R0)/(e*R0*rho) = {floor}",
                    p.h_lag_inf
                ));
            }
            Ok((a, b))
        }
    }
}

/// Corollary for the autonomous equation with one constant delay `tau`:
/// `tau r0 rho < (1-r0)^2`, or `(1-r0)/e < tau r0 rho < (1+1/e)(1-r0)^2`.
/// The reported sides belong to whichever branch decides the outcome.
pub fn eval_logistic_cor(r0: f64, rho: f64, tau: f64) -> Result<Verdict, CriteriaError> {
    if !(r0 > 0.0) || rho < 0.0 || r0 * rho >= 1.0 {
        return Err(CriteriaError::InvalidInput(format!(
            "need r0 > 0, rho >= 0 and r0*rho < 1, got r0 = {r0}, rho = {rho}"
        )));
    }
    let x = tau * r0 * rho;
    let sq = (1.0 - r0) * (1.0 - r0);
    let first = Verdict::new(CriterionId::LogCor, x, sq, true).with_note("branch 1: tau*r0*rho < (1-r0)^2");
    let lower = (1.0 - r0) / E;
    let second = Verdict::new(CriterionId::LogCor, x, ONE_PLUS_INV_E * sq, x > lower)
        .with_note("branch 2: (1-r0)/e < tau*r0*rho < (1+1/e)(1-r0)^2");
    let chosen = if first.satisfied || (!second.satisfied && !second.precondition_ok) {
        first
    } else {
        second
    };
    Ok(chosen.with_note("as printed; not counted toward certification"))
}

/// The comparison test `2 r0|rho|(2 - r0|rho|) + r tau < 3/2`, reading the bare `r` as `r0`.
pub fn eval_yu_prop1(r0: f64, rho: f64, tau: f64) -> Result<Verdict, CriteriaError> {
    if !(r0 > 0.0) {
        return Err(CriteriaError::InvalidInput(format!("need r0 > 0, got {r0}")));
    }
    let s = r0 * rho.abs();
    let lhs = 2.0 * s * (2.0 - s) + r0 * tau;
    Ok(Verdict::new(CriterionId::YuProp1, lhs, 1.5, true).with_note("the r multiplying tau is read as r0"))
}
