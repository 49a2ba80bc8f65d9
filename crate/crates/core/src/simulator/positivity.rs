//! Numerical checks for the single-delay comparison equation `x'(t) + B(t) x(t - tau0) = 0`.
//!
//! When `int_{t-tau0}^t B(s) ds <= 1/e` its fundamental function `X0(t, s)` is
//! positive and `int_{t0+tau0}^t X0(t, s) B(s) ds <= 1`.

use serde::Serialize;

use super::decay::{estimate_decay, DecayEstimate, DecayOptions};
use super::engine::{run, Dynamics};
use super::trajectory::{History, Status, Trajectory};
use super::{grid_steps, SimError};
use crate::criteria::{window_integral_limsup, LimsupMethod, WindowOptions};
use crate::funcspec::{EvalError, FuncExpr};

pub const INV_E: f64 = 0.367_879_441_171_442_33;

/// Relative slack on the window test so that exact boundary cases count as satisfied.
const WINDOW_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityOptions {
    /// Fundamental functions are computed for every `s_stride`-th grid node.
    pub s_stride: usize,
    pub quadrature_tolerance: f64,
    pub decay: DecayOptions,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        PositivityOptions {
            s_stride: 1,
            quadrature_tolerance: 1e-4,
            decay: DecayOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub tau0: f64,
    /// `sup_t int_{t-tau0}^t B(s) ds`.
    pub window_integral: f64,
    pub window_method: LimsupMethod,
    pub applicable: bool,
    pub min_rate: f64,
    pub min_x0: f64,
    /// `max_t int_{t0+tau0}^t X0(t, s) B(s) ds`.
    pub max_integral: f64,
    pub integral_bound_holds: bool,
    /// Decay of `X0(., t0)`; absent when that run diverged.
    pub decay: Option<DecayEstimate>,
    pub options: PositivityOptions,
    pub notes: Vec<String>,
}

struct SingleDelay<'a> {
    b: &'a FuncExpr,
    tau0: f64,
}

impl Dynamics for SingleDelay<'_> {
    fn lag_g(&self, _t: f64) -> Result<f64, EvalError> {
        Ok(self.tau0)
    }

    fn lag_h(&self, _t: f64) -> Result<f64, EvalError> {
        Ok(self.tau0)
    }

    fn derivative(&self, t: f64, _x: f64, x_h: f64, _dx_g: f64) -> Result<f64, EvalError> {
        Ok(-self.b.eval(t)? * x_h)
    }
}

pub fn check_positivity(
    b: &FuncExpr,
    tau0: f64,
    t0: f64,
    t_end: f64,
    dt: f64,
    opts: &PositivityOptions,
) -> Result<PositivityReport, SimError> {
    if !(tau0 >= 0.0 && tau0.is_finite()) {
        return Err(SimError::InvalidArgument(format!(
            "lag must be non-negative, got {tau0}"
        )));
    }
    if opts.s_stride == 0 {
        return Err(SimError::InvalidArgument("s_stride must be at least 1".into()));
    }
    let steps = grid_steps(t0, t_end, dt, &[tau0])?;
    let mut notes = Vec::new();

    let time = |i: usize| t0 + dt * i as f64;
    let rates: Vec<f64> = (0..=steps).map(|i| b.eval(time(i))).collect::<Result<_, _>>()?;
    let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_rate > 0.0) {
        notes.push(format!("B is not positive on the grid (min {min_rate})"));
    }

    let window_opts = WindowOptions {
        start: t0 - tau0,
        horizon: t_end - t0 + tau0,
        step: dt / 4.0,
        force_numeric: false,
    };
    let (window_integral, window_method) =
        window_integral_limsup(b, tau0, &window_opts).map_err(|e| SimError::InvalidArgument(e.to_string()))?;
    let applicable = min_rate > 0.0 && window_integral <= INV_E * (1.0 + WINDOW_SLACK);
    if !applicable {
        notes.push("positivity condition not met".into());
    }

    let dynamics = SingleDelay { b, tau0 };
    let stride = opts.s_stride;
    let sources: Vec<usize> = (0..=steps).step_by(stride).collect();
    let kernels: Vec<Trajectory> = sources
        .iter()
        .map(|&j| run(&dynamics, &History::UnitJump, time(j), dt, steps - j))
        .collect::<Result<_, _>>()?;
    if kernels.iter().any(|k| k.status != Status::Completed) {
        notes.push("some X0(., s) runs stopped early".into());
    }
    // X0(t_i, s_j) for source index q (s_j = time(sources[q])).
    let x0 = |i: usize, q: usize| -> Option<f64> {
        let j = sources[q];
        i.checked_sub(j).and_then(|k| kernels[q].x.get(k).copied())
    };

    let min_x0 = kernels
        .iter()
        .flat_map(|k| k.x.iter().copied())
        .fold(f64::INFINITY, f64::min);

    let lower = t0 + tau0;
    let mut max_integral = 0.0f64;
    for i in 0..=steps {
        let t = time(i);
        if t < lower {
            continue;
        }
        // Integrand samples (s, X0(t, s) B(s)) on [lower, t].
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for (q, &j) in sources.iter().enumerate() {
            let s = time(j);
            if j > i {
                break;
            }
            if s < lower {
                continue;
            }
            if pts.is_empty() && s > lower && q > 0 {
                let sp = time(sources[q - 1]);
                if let (Some(a), Some(c)) = (x0(i, q - 1), x0(i, q)) {
                    let w = (lower - sp) / (s - sp);
                    let v = (1.0 - w) * a * rates[sources[q - 1]] + w * c * rates[j];
                    pts.push((lower, v));
                }
            }
            if let Some(v) = x0(i, q) {
                pts.push((s, v * rates[j]));
            }
        }
        if pts.last().is_none_or(|p| p.0 < t) {
            pts.push((t, rates[i]));
        }
        let integral: f64 = pts
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        max_integral = max_integral.max(integral);
    }
    let integral_bound_holds = max_integral <= 1.0 + opts.quadrature_tolerance;

    let decay = match estimate_decay(&kernels[0], &opts.decay) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(format!("decay not estimated: {e}"));
            None
        }
    };

    Ok(PositivityReport {
        tau0,
        window_integral,
        window_method,
        applicable,
        min_rate,
        min_x0,
        max_integral,
        integral_bound_holds,
        decay,
        options: *opts,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::super::DecayVerdict;
    use super::*;

    fn fx(s: &str) -> FuncExpr {
        FuncExpr::parse(s).unwrap()
    }

    #[test]
    fn boundary_case() {
        let r = check_positivity(&fx("1"), INV_E, 0.0, 8.0, 0.01, &PositivityOptions::default()).unwrap();
        assert!(r.applicable, "{r:?}");
        assert!(r.min_x0 > 0.0);
        assert!(r.max_integral <= 1.0 + 1e-4, "{}", r.max_integral);
        assert_eq!(r.decay.unwrap().verdict, DecayVerdict::Decaying);
    }

    #[test]
    fn ode_case_is_exact() {
        let r = check_positivity(&fx("1"), 0.0, 0.0, 6.0, 0.01, &PositivityOptions::default()).unwrap();
        assert_eq!(r.window_integral, 0.0);
        assert!((r.max_integral - (1.0 - (-6.0f64).exp())).abs() < 1e-4);
        assert!(r.integral_bound_holds);
    }

    #[test]
    fn periodic_rate() {
        let opts = PositivityOptions {
            s_stride: 2,
            ..Default::default()
        };
        let r = check_positivity(&fx("0.3*(1+0.1*sin(t))"), 1.0, 0.0, 30.0, 0.02, &opts).unwrap();
        assert!(r.window_integral <= 0.33 + 1e-12);
        assert!(r.applicable);
        assert!(r.min_x0 > 0.0);
        assert!(r.integral_bound_holds);
    }

    #[test]
    fn large_window_is_flagged() {
        let r = check_positivity(
            &fx("2"),
            1.0,
            0.0,
            10.0,
            0.02,
            &PositivityOptions {
                s_stride: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!r.applicable);
        assert!(r.notes.iter().any(|n| n == "positivity condition not met"));
        assert!(r.min_x0 < 0.0);
    }
}
