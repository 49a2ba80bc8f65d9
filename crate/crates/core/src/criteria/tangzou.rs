//! Comparison tests for `x'(t) - a x'(t - sigma) = -b(t) x(t - tau)` with constant `a`.
//!
//! Both tests bound the limsup of a sliding-window integral of `b`. For
//! `b = c0 + c1 sin(w t + p)` the limsup is `c0 W + (2|c1|/|w|) |sin(w W / 2)|`;
//! otherwise it is approximated by the maximum over a finite horizon.

use serde::Serialize;

use super::verdict::{CriterionId, Verdict};
use super::CriteriaError;
use crate::funcspec::{sinusoid, FuncExpr};

/// Smallest positive integer `N` with `a + 1.5 a^N <= 1`.
pub fn tangzou_n(a: f64) -> Result<u32, CriteriaError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(CriteriaError::InvalidInput(format!(
            "neutral coefficient must lie in (0, 1), got {a}"
        )));
    }
    let mut n = 1u32;
    let mut pow = a;
    while a + 1.5 * pow > 1.0 {
        n += 1;
        pow *= a;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimsupMethod {
    ClosedForm,
    SlidingWindow,
}

/// Finite-horizon settings for the sliding-window maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowOptions {
    pub start: f64,
    pub horizon: f64,
    /// Target quadrature step; shrunk so the window is an integer number of steps.
    pub step: f64,
    /// Use the sliding window even when a closed form is available.
    pub force_numeric: bool,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            start: 0.0,
            horizon: 200.0,
            step: 1e-3,
            force_numeric: false,
        }
    }
}

/// `limsup_t int_{t-W}^{t} b(s) ds`.
pub fn window_integral_limsup(
    b: &FuncExpr,
    window: f64,
    opts: &WindowOptions,
) -> Result<(f64, LimsupMethod), CriteriaError> {
    if !(window >= 0.0) {
        return Err(CriteriaError::InvalidInput(format!("negative window {window}")));
    }
    if !opts.force_numeric {
        if let Some(s) = sinusoid(b.ast()) {
            let osc = if s.is_constant() {
                0.0
            } else {
                2.0 * s.amplitude.abs() / s.omega.abs() * (0.5 * s.omega * window).sin().abs()
            };
            return Ok((s.offset * window + osc, LimsupMethod::ClosedForm));
        }
    }
    if opts.horizon < 3.0 * window {
        return Err(CriteriaError::HorizonTooShort {
            horizon: opts.horizon,
            window,
        });
    }
    if window == 0.0 {
        return Ok((0.0, LimsupMethod::SlidingWindow));
    }
    let per_window = (window / opts.step).ceil().max(1.0) as usize;
    let h = window / per_window as f64;
    let n = (opts.horizon / h).floor() as usize;
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    let mut prev = b.eval(opts.start)?;
    let mut acc = 0.0;
    for i in 1..=n {
        let v = b.eval(opts.start + h * i as f64)?;
        acc += 0.5 * h * (prev + v);
        cumulative.push(acc);
        prev = v;
    }
    let best = (per_window..=n)
        .map(|i| cumulative[i] - cumulative[i - per_window])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((best, LimsupMethod::SlidingWindow))
}

/// Both comparison tests. Verdict 1 uses the window `3 tau + (N-1) sigma`
/// against `3/2 - 2a(1 - a/4)`; verdict 2 uses `tau + (N-1) sigma` against
/// `(3 - 4a^N)(1 - a) / (2(1 - a^N))`.
pub fn eval_tangzou(
    a: f64,
    b: &FuncExpr,
    tau: f64,
    sigma: f64,
    opts: &WindowOptions,
) -> Result<(Verdict, Verdict), CriteriaError> {
    let n = tangzou_n(a)?;
    let a_n = a.powi(n as i32);
    let shift = (n - 1) as f64 * sigma;

    let w1 = 3.0 * tau + shift;
    let (lhs1, m1) = window_integral_limsup(b, w1, opts)?;
    let rhs1 = 1.5 - 2.0 * a * (1.0 - 0.25 * a);

    let w2 = tau + shift;
    let (lhs2, m2) = window_integral_limsup(b, w2, opts)?;
    let rhs2 = (3.0 - 4.0 * a_n) * (1.0 - a) / (2.0 * (1.0 - a_n));

    let note = |w: f64, m: LimsupMethod| format!("N = {n}, window = {w}, limsup via {m:?}");
    Ok((
        Verdict::new(CriterionId::Tangzou1, lhs1, rhs1, true).with_note(note(w1, m1)),
        Verdict::new(CriterionId::Tangzou2, lhs2, rhs2, true).with_note(note(w2, m2)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::Bindings;

    fn b_of(r: f64) -> FuncExpr {
        let mut env = Bindings::new();
        env.insert("r".into(), r);
        FuncExpr::parse_with("r*(1+0.1*sin(t))", &env).unwrap()
    }

    #[test]
    fn n_for_a_0_6() {
        assert_eq!(tangzou_n(0.6).unwrap(), 3);
        assert_eq!(tangzou_n(0.1).unwrap(), 1);
        assert_eq!(tangzou_n(0.8).unwrap(), 10);
        assert!(tangzou_n(1.0).is_err());
        assert!(tangzou_n(0.0).is_err());
    }

    #[test]
    fn right_sides() {
        let (v1, v2) = eval_tangzou(0.6, &b_of(0.1), 1.0, 0.1, &WindowOptions::default()).unwrap();
        assert!((v1.rhs - 0.48).abs() < 1e-15);
        // (3 - 4*0.216) * 0.4 / (2 * 0.784)
        assert!((v2.rhs - 0.8544 / 1.568).abs() < 1e-15);
        assert!((v2.rhs - 0.544_898).abs() < 1e-6);
    }

    #[test]
    fn constant_rate_window() {
        let b = FuncExpr::parse("0.7").unwrap();
        let (closed, m) = window_integral_limsup(&b, 1.0, &WindowOptions::default()).unwrap();
        assert_eq!(m, LimsupMethod::ClosedForm);
        assert_eq!(closed, 0.7);
        let opts = WindowOptions {
            force_numeric: true,
            horizon: 20.0,
            ..Default::default()
        };
        let (num, m) = window_integral_limsup(&b, 1.0, &opts).unwrap();
        assert_eq!(m, LimsupMethod::SlidingWindow);
        assert!((num - closed).abs() < 1e-9);
    }

    #[test]
    fn numeric_mode_needs_three_windows() {
        let b = FuncExpr::parse("1+abs(sin(t))").unwrap();
        let opts = WindowOptions {
            horizon: 5.0,
            ..Default::default()
        };
        assert!(matches!(
            window_integral_limsup(&b, 2.0, &opts),
            Err(CriteriaError::HorizonTooShort { .. })
        ));
    }
}
