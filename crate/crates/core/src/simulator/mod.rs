//! Numerical integration of `x'(t) - a(t) x'(g(t)) + b(t) x(h(t)) = f(t)`.

mod decay;
mod engine;
mod positivity;
mod trajectory;

use serde::Serialize;
use thiserror::Error;

use crate::funcspec::{constant_value, DelayFunc, EvalError, FuncExpr};
use crate::series::{apply_inv_i_minus_s, SeriesBounds, SeriesError};

pub use decay::{estimate_decay, DecayEstimate, DecayOptions, DecayVerdict};
pub use positivity::{check_positivity, PositivityOptions, PositivityReport, INV_E};
pub use trajectory::{History, Status, Trajectory};

pub(crate) use engine::{run, Dynamics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("step {dt} exceeds a quarter of the smallest positive lag ({limit})")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("fixed-point iteration for the neutral term failed at t = {t}")]
    ContractionLost { t: f64 },
    #[error("trajectory did not complete: {0:?}")]
    NotCompleted(Status),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Initial-value problem for the linear neutral equation.
#[derive(Debug, Clone, PartialEq)]
pub struct NDDEProblem {
    pub a: FuncExpr,
    pub b: FuncExpr,
    pub g: DelayFunc,
    pub h: DelayFunc,
    pub f: FuncExpr,
    pub phi: FuncExpr,
    pub psi: FuncExpr,
    pub t0: f64,
}

impl NDDEProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: FuncExpr,
        b: FuncExpr,
        g: DelayFunc,
        h: DelayFunc,
        f: FuncExpr,
        phi: FuncExpr,
        psi: FuncExpr,
        t0: f64,
    ) -> Self {
        NDDEProblem {
            a,
            b,
            g,
            h,
            f,
            phi,
            psi,
            t0,
        }
    }

    pub fn history(&self) -> History {
        History::functions(self.phi.clone(), self.psi.clone())
    }
}

struct Linear<'a> {
    p: &'a NDDEProblem,
    forced: bool,
}

impl Dynamics for Linear<'_> {
    fn lag_g(&self, t: f64) -> Result<f64, EvalError> {
        self.p.g.lag_at(t)
    }

    fn lag_h(&self, t: f64) -> Result<f64, EvalError> {
        self.p.h.lag_at(t)
    }

    fn derivative(&self, t: f64, _x: f64, x_h: f64, dx_g: f64) -> Result<f64, EvalError> {
        let f = if self.forced { self.p.f.eval(t)? } else { 0.0 };
        Ok(self.p.a.eval(t)? * dx_g - self.p.b.eval(t)? * x_h + f)
    }
}

/// Number of steps for `[t0, t_end]`, enforcing `dt <= lag / 4` for every positive lag bound.
pub(crate) fn grid_steps(t0: f64, t_end: f64, dt: f64, lags: &[f64]) -> Result<usize, SimError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::InvalidGrid(format!("step must be positive, got {dt}")));
    }
    if !(t_end > t0) {
        return Err(SimError::InvalidGrid(format!("end time {t_end} not after start {t0}")));
    }
    let limit = lags.iter().copied().filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min) / 4.0;
    if dt > limit * (1.0 + 1e-12) {
        return Err(SimError::StepTooLarge { dt, limit });
    }
    Ok(((t_end - t0) / dt).round() as usize)
}

fn integrate_with(
    p: &NDDEProblem,
    history: &History,
    start: f64,
    t_end: f64,
    dt: f64,
    forced: bool,
) -> Result<Trajectory, SimError> {
    let steps = grid_steps(start, t_end, dt, &[p.g.declared_max, p.h.declared_max])?;
    let tr = run(&Linear { p, forced }, history, start, dt, steps)?;
    match tr.status {
        Status::LeftContractionRegion { t } => Err(SimError::ContractionLost { t }),
        _ => Ok(tr),
    }
}

/// Solve on `[t0, t_end]`. A run that exceeds the divergence cutoff is returned
/// truncated with [`Status::Diverged`].
pub fn integrate(p: &NDDEProblem, t_end: f64, dt: f64) -> Result<Trajectory, SimError> {
    integrate_with(p, &p.history(), p.t0, t_end, dt, true)
}

/// Fundamental function `X(., s)` on `[s, t_end]`; zero before `s`.
pub fn fundamental(p: &NDDEProblem, s: f64, t_end: f64, dt: f64) -> Result<Trajectory, SimError> {
    if s < p.t0 {
        return Err(SimError::InvalidArgument(format!(
            "fundamental start {s} precedes t0 = {}",
            p.t0
        )));
    }
    integrate_with(p, &History::UnitJump, s, t_end, dt, false)
}

/// Solution at `t_end` against `int_{t0}^{t_end} X(t_end, s) ((I - S)^{-1} f)(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationCheck {
    pub solution: f64,
    pub quadrature: f64,
    pub relative_error: f64,
}

/// Compare a zero-history solution with its integral representation.
///
/// Requires constant `a`, `b` and lags so that `X(t, s) = X(t - s + t0, t0)`.
pub fn representation_check(
    p: &NDDEProblem,
    t_end: f64,
    dt: f64,
    series_tol: f64,
) -> Result<RepresentationCheck, SimError> {
    let a = constant_value(&p.a);
    if a.is_none() || constant_value(&p.b).is_none() || p.g.constant_lag().is_none() || p.h.constant_lag().is_none() {
        return Err(SimError::InvalidArgument(
            "representation check needs constant coefficients and lags".into(),
        ));
    }
    let zero = FuncExpr::constant(0.0);
    let mut zeroed = p.clone();
    zeroed.phi = zero.clone();
    zeroed.psi = zero;
    let x = integrate(&zeroed, t_end, dt)?;
    let kernel = fundamental(p, p.t0, t_end, dt)?;
    if !x.is_completed() || !kernel.is_completed() {
        return Err(SimError::NotCompleted(if x.is_completed() {
            kernel.status
        } else {
            x.status
        }));
    }

    let n = x.len() - 1;
    let f_sup = (0..=n)
        .map(|i| p.f.eval(x.time(i)).map(f64::abs))
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
    let bounds = SeriesBounds {
        a_sup: a.unwrap_or(0.0).abs(),
        y_sup: f_sup,
        start: p.t0,
    };
    // Cell midpoints: (I - S)^{-1} f jumps at lag multiples, which fall on nodes.
    let mut quadrature = 0.0;
    for i in 0..n {
        let s = x.time(i) + 0.5 * dt;
        let y = apply_inv_i_minus_s(&p.f, &p.a, &p.g, s, &bounds, series_tol)?.value;
        quadrature += dt * kernel.value_at(x.t_end() - s + p.t0)? * y;
    }
    let solution = x.x[n];
    Ok(RepresentationCheck {
        solution,
        quadrature,
        relative_error: (solution - quadrature).abs() / solution.abs().max(f64::MIN_POSITIVE),
    })
}
