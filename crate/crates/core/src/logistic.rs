//! Neutral logistic equation `x'(t) = r(t) x(t) (1 - (x(h(t)) - rho x'(g(t))) / K)`.

use serde::Serialize;
use thiserror::Error;

use crate::criteria::{
    check_all, eval_logistic_cor, eval_logistic_thm, eval_yu_prop1, CheckOptions, CheckReport, CriteriaError,
    CriterionId, LogisticMode, LogisticParams, Skipped, Verdict,
};
use crate::funcspec::{constant_value, DelayFunc, EvalError, FuncExpr};
use crate::simulator::{grid_steps, run, Dynamics, History, NDDEProblem, SimError, Status, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogisticError {
    #[error("invalid logistic problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct LogisticProblem {
    pub r: FuncExpr,
    pub K: f64,
    pub rho: f64,
    pub g: DelayFunc,
    pub h: DelayFunc,
    pub phi: FuncExpr,
    pub psi: FuncExpr,
    pub t0: f64,
}

impl LogisticProblem {
    #[allow(clippy::too_many_arguments, non_snake_case)]
    pub fn new(
        r: FuncExpr,
        K: f64,
        rho: f64,
        g: DelayFunc,
        h: DelayFunc,
        phi: FuncExpr,
        psi: FuncExpr,
        t0: f64,
    ) -> Result<Self, LogisticError> {
        if !(K > 0.0 && K.is_finite()) {
            return Err(LogisticError::Invalid(format!(
                "carrying capacity must be positive, got {K}"
            )));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(LogisticError::Invalid(format!("rho must be non-negative, got {rho}")));
        }
        Ok(LogisticProblem {
            r,
            K,
            rho,
            g,
            h,
            phi,
            psi,
            t0,
        })
    }
}

struct Logistic<'a>(&'a LogisticProblem);

impl Dynamics for Logistic<'_> {
    fn lag_g(&self, t: f64) -> Result<f64, EvalError> {
        self.0.g.lag_at(t)
    }

    fn lag_h(&self, t: f64) -> Result<f64, EvalError> {
        self.0.h.lag_at(t)
    }

    fn derivative(&self, t: f64, x: f64, x_h: f64, dx_g: f64) -> Result<f64, EvalError> {
        let p = self.0;
        Ok(p.r.eval(t)? * x * (1.0 - (x_h - p.rho * dx_g) / p.K))
    }

    fn positive_state(&self) -> bool {
        true
    }
}

/// Integrate on `[t0, t_end]`. Reaching zero, diverging or losing the
/// fixed-point contraction of the neutral term stops the run with a flag.
pub fn integrate_logistic(p: &LogisticProblem, t_end: f64, dt: f64) -> Result<Trajectory, LogisticError> {
    let steps = grid_steps(p.t0, t_end, dt, &[p.g.declared_max, p.h.declared_max])?;
    let history = History::functions(p.phi.clone(), p.psi.clone());
    Ok(run(&Logistic(p), &history, p.t0, dt, steps)?)
}

/// Linearization about `K`: `z'(t) - rho r(t) z'(g(t)) + r(t) z(h(t)) = 0`, `z = x - K`.
pub fn linearize(p: &LogisticProblem) -> NDDEProblem {
    NDDEProblem::new(
        p.r.scaled(p.rho),
        p.r.clone(),
        p.g.clone(),
        p.h.clone(),
        FuncExpr::constant(0.0),
        p.phi.shifted(-p.K),
        p.psi.clone(),
        p.t0,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalStabilityReport {
    /// General tests applied to the linearization.
    pub linearized: CheckReport,
    pub params: LogisticParams,
    /// Linearization verdicts followed by the logistic-specific ones.
    pub verdicts: Vec<Verdict>,
    pub skipped: Vec<Skipped>,
    /// Some sound test certifies local stability.
    pub certified: bool,
    /// Also counting the logistic inequalities in their printed form.
    pub certified_as_printed: bool,
}

impl LocalStabilityReport {
    pub fn verdict(&self, id: CriterionId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.criterion == id)
    }
}

pub fn check_local_stability(p: &LogisticProblem, opts: &CheckOptions) -> Result<LocalStabilityReport, LogisticError> {
    let lin = linearize(p);
    let linearized = check_all(&lin, opts)?;
    let b = linearized.bounds.bounds;
    let params = LogisticParams {
        r0: b.b0,
        R0: b.B0,
        rho: p.rho,
        tau: b.tau,
        sigma: b.sigma,
        h_lag_inf: b.h_lag_inf,
    };

    let mut verdicts = linearized.verdicts.clone();
    let mut skipped = linearized.skipped.clone();
    for mode in [LogisticMode::AsStated, LogisticMode::Derived] {
        let (va, vb) = eval_logistic_thm(&params, mode)?;
        verdicts.push(va);
        verdicts.push(vb);
    }

    let single_delay = match (constant_value(&p.r), p.g.constant_lag(), p.h.constant_lag()) {
        (Some(r0), Some(s), Some(t)) if s == t => Some((r0, t)),
        _ => None,
    };
    match single_delay {
        Some((r0, tau)) => {
            verdicts.push(eval_logistic_cor(r0, p.rho, tau)?);
            verdicts.push(eval_yu_prop1(r0, p.rho, tau)?);
        }
        None => {
            for criterion in [CriterionId::LogCor, CriterionId::YuProp1] {
                skipped.push(Skipped {
                    criterion,
                    reason: "requires constant r and equal constant lags".into(),
                });
            }
        }
    }

    let counts = |v: &Verdict| v.satisfied && !linearized.companion.contains(&v.criterion);
    let certified = verdicts
        .iter()
        .any(|v| counts(v) && !v.criterion.is_as_printed_logistic());
    let certified_as_printed = verdicts.iter().any(counts);
    Ok(LocalStabilityReport {
        linearized,
        params,
        verdicts,
        skipped,
        certified,
        certified_as_printed,
    })
}

/// Outcome of one constant initial history `phi = K (1 + eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinProbe {
    pub eps: f64,
    pub converged: bool,
    pub final_deviation: f64,
    pub status: Status,
}

/// Empirical convergence from constant histories; no claim beyond the tested values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinReport {
    pub probes: Vec<BasinProbe>,
    /// Largest `|eps|` such that every probe up to it converged.
    pub largest_converged: Option<f64>,
    pub rel_tol: f64,
}

pub fn empirical_basin(
    p: &LogisticProblem,
    eps: &[f64],
    t_end: f64,
    dt: f64,
    rel_tol: f64,
) -> Result<BasinReport, LogisticError> {
    let mut probes = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut q = p.clone();
        q.phi = FuncExpr::constant(p.K * (1.0 + e));
        q.psi = FuncExpr::constant(0.0);
        let tr = integrate_logistic(&q, t_end, dt)?;
        let last = *tr.x.last().expect("non-empty trajectory");
        let final_deviation = (last - p.K).abs() / p.K;
        probes.push(BasinProbe {
            eps: e,
            converged: tr.is_completed() && final_deviation <= rel_tol,
            final_deviation,
            status: tr.status,
        });
    }
    let mut sorted: Vec<&BasinProbe> = probes.iter().collect();
    sorted.sort_by(|a, b| a.eps.abs().total_cmp(&b.eps.abs()));
    let largest_converged = sorted.iter().take_while(|b| b.converged).map(|b| b.eps.abs()).last();
    Ok(BasinReport {
        probes,
        largest_converged,
        rel_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::extract_bounds;

    fn fx(s: &str) -> FuncExpr {
        FuncExpr::parse(s).unwrap()
    }

    fn lag(d: f64) -> DelayFunc {
        DelayFunc::constant(d).unwrap()
    }

    fn model(r: &str, rho: f64, tau: f64, phi: &str) -> LogisticProblem {
        LogisticProblem::new(fx(r), 1.0, rho, lag(tau), lag(tau), fx(phi), fx("0"), 0.0).unwrap()
    }

    #[test]
    fn equilibrium_is_preserved() {
        let tr = integrate_logistic(&model("0.2*(1+0.1*sin(t))", 4.0, 0.9, "1"), 100.0, 0.01).unwrap();
        assert!(tr.is_completed());
        assert!(tr.x.iter().all(|x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn logistic_ode_increases_to_capacity() {
        let p = LogisticProblem::new(
            fx("1"),
            2.0,
            0.0,
            lag(1.0),
            DelayFunc::identity(),
            fx("0.5"),
            fx("0"),
            0.0,
        )
        .unwrap();
        let tr = integrate_logistic(&p, 20.0, 0.01).unwrap();
        assert!(tr.x.windows(2).all(|w| w[1] >= w[0] && w[1] < 2.0));
        // x = K / (1 + (K/x0 - 1) e^{-t})
        let exact = |t: f64| 2.0 / (1.0 + 3.0 * (-t).exp());
        let err = tr
            .times()
            .zip(&tr.x)
            .map(|(t, x)| (x - exact(t)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn neutral_case_converges() {
        let tr = integrate_logistic(&model("0.2", 4.0, 0.9, "1.1"), 200.0, 0.01).unwrap();
        assert!(tr.is_completed());
        assert!((tr.x.last().unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn extinction_is_flagged() {
        let p = LogisticProblem::new(
            fx("1"),
            1.0,
            0.0,
            lag(1.0),
            DelayFunc::identity(),
            fx("0"),
            fx("0"),
            0.0,
        )
        .unwrap();
        let tr = integrate_logistic(&p, 5.0, 0.01).unwrap();
        assert_eq!(tr.status, Status::ReachedZero { t: 0.0 });
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LogisticProblem::new(fx("1"), 0.0, 0.0, lag(1.0), lag(1.0), fx("1"), fx("0"), 0.0).is_err());
        assert!(LogisticProblem::new(fx("1"), 1.0, -0.5, lag(1.0), lag(1.0), fx("1"), fx("0"), 0.0).is_err());
    }

    #[test]
    fn linearization_coefficients() {
        let lin = linearize(&model("0.2", 4.0, 1.0, "1.1"));
        assert!((lin.a.eval(3.0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(lin.b.eval(3.0).unwrap(), 0.2);
        assert!((lin.phi.eval(0.0).unwrap() - 0.1).abs() < 1e-15);

        let lin = linearize(&model("0.3", 0.0, 1.0, "1"));
        assert_eq!(lin.a.eval(1.0).unwrap(), 0.0);

        let lin = linearize(&model("0.2*(1+0.1*sin(t))", 2.0, 1.0, "1"));
        let eb = extract_bounds(&lin, (0.0, 100.0), 1000).unwrap();
        assert!((eb.bounds.A0 - 0.44).abs() < 1e-12);
        assert!((eb.bounds.B0 - 0.22).abs() < 1e-12);
    }

    #[test]
    fn linearization_error_is_quadratic() {
        let base = model("0.2", 4.0, 0.9, "1");
        let deviation = |eps: f64| {
            let mut p = base.clone();
            p.phi = FuncExpr::constant(1.0 + eps);
            let x = integrate_logistic(&p, 50.0, 0.01).unwrap();
            let z = crate::simulator::integrate(&linearize(&p), 50.0, 0.01).unwrap();
            x.x.iter()
                .zip(&z.x)
                .map(|(x, z)| (x - 1.0 - z).abs())
                .fold(0.0, f64::max)
        };
        let ratio = deviation(0.02) / deviation(0.01);
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn local_stability_examples() {
        let opts = CheckOptions::default();
        let r = check_local_stability(&model("0.2", 4.0, 1.0, "1"), &opts).unwrap();
        assert!(r.verdict(CriterionId::LogCor).unwrap().satisfied);
        assert!(!r.verdict(CriterionId::YuProp1).unwrap().satisfied);
        assert!(r.certified_as_printed);

        let r = check_local_stability(&model("0.2", 4.0, 1.2, "1"), &opts).unwrap();
        assert!(!r.verdict(CriterionId::LogCor).unwrap().satisfied);
        assert!(!r.certified);

        // rho = 0, r0 tau = 1.2 < 1 + 1/e with the lag precondition met
        let r = check_local_stability(&model("0.4", 0.0, 3.0, "1"), &opts).unwrap();
        assert!(r.verdict(CriterionId::Thm1B).unwrap().satisfied);
        assert!(r.certified);
    }

    #[test]
    fn basin_probe() {
        let b = empirical_basin(&model("0.2", 4.0, 0.9, "1"), &[0.05, -0.05, 0.1], 200.0, 0.02, 0.01).unwrap();
        assert_eq!(b.probes.len(), 3);
        assert_eq!(b.largest_converged, Some(0.1));
    }
}
