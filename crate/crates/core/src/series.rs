//! Iterated delays and the series form of `(I - S)^{-1}`, where `(S y)(t) = a(t) y(g(t))`.
//!
//! `((I - S)^{-1} y)(t) = y(t) + sum_{j>=1} prod_{k<j} a(g^[k](t)) y(g^[j](t))`,
//! truncated at the depth where the geometric tail `A0^J sup|y| / (1 - A0)`
//! drops below the requested tolerance.

use serde::Serialize;
use thiserror::Error;

use crate::funcspec::{DelayFunc, EvalError, FuncExpr, ParamBounds};

pub const MAX_DEPTH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("neutral bound A0 = {0} is not below 1")]
    NotAContraction(f64),
    #[error("tolerance {tol} needs more than {MAX_DEPTH} terms for A0 = {a_sup}")]
    DepthCapExceeded { a_sup: f64, tol: f64 },
    #[error("B(t) = {value} (tail {tail}) outside [{lower}, {upper}] at t = {t}: bounds are inconsistent")]
    Sandwich {
        t: f64,
        value: f64,
        tail: f64,
        lower: f64,
        upper: f64,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `g^[k](t)` for `k = 0..=depth`, with `g^[0](t) = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedDelayCache {
    pub base_t: f64,
    pub values: Vec<f64>,
}

impl IteratedDelayCache {
    pub fn build(g: &DelayFunc, t: f64, depth: usize) -> Result<Self, EvalError> {
        let mut values = Vec::with_capacity(depth + 1);
        values.push(t);
        let mut s = t;
        for _ in 0..depth {
            s = g.apply(s)?;
            values.push(s);
        }
        Ok(IteratedDelayCache { base_t: t, values })
    }

    pub fn depth(&self) -> usize {
        self.values.len() - 1
    }
}

/// k-fold composition `g(g(...g(t)))`.
pub fn iterated_delay(g: &DelayFunc, t: f64, k: usize) -> Result<f64, EvalError> {
    let mut s = t;
    for _ in 0..k {
        s = g.apply(s)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: f64,
    pub truncation_depth: usize,
    /// Upper bound on the neglected terms.
    pub tail_bound: f64,
}

/// Depth `J` and tail `A0^J y_sup / (1 - A0)` for the first `J` with tail below `tol`.
pub fn truncation_depth(a_sup: f64, y_sup: f64, tol: f64) -> Result<(usize, f64), SeriesError> {
    if !(a_sup < 1.0) {
        return Err(SeriesError::NotAContraction(a_sup));
    }
    if a_sup <= 0.0 || y_sup == 0.0 {
        return Ok((0, 0.0));
    }
    let scale = y_sup.abs() / (1.0 - a_sup);
    let mut pow = 1.0;
    for depth in 0..=MAX_DEPTH {
        let tail = pow * scale;
        if tail < tol {
            return Ok((depth, tail));
        }
        pow *= a_sup;
    }
    Err(SeriesError::DepthCapExceeded { a_sup, tol })
}

/// A-priori sizes the truncation is chosen from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBounds {
    /// `A0 >= sup |a|`.
    pub a_sup: f64,
    /// `sup |y|` over the relevant past.
    pub y_sup: f64,
    /// Start of the function space; terms with `g^[j](t) < start` vanish.
    /// `f64::NEG_INFINITY` for the whole line.
    pub start: f64,
}

/// Evaluate `((I - S)^{-1} y)(t)`.
pub fn apply_inv_i_minus_s(
    y: &FuncExpr,
    a: &FuncExpr,
    g: &DelayFunc,
    t: f64,
    bounds: &SeriesBounds,
    tol: f64,
) -> Result<SeriesResult, SeriesError> {
    let (depth, tail) = truncation_depth(bounds.a_sup, bounds.y_sup, tol)?;
    series_at(t, depth, tail, a, g, |s| {
        if s < bounds.start {
            Ok(None)
        } else {
            y.eval(s).map(Some)
        }
    })
}

fn series_at(
    t: f64,
    depth: usize,
    tail: f64,
    a: &FuncExpr,
    g: &DelayFunc,
    term: impl Fn(f64) -> Result<Option<f64>, EvalError>,
) -> Result<SeriesResult, SeriesError> {
    let mut value = term(t)?.unwrap_or(0.0);
    let mut weight = 1.0;
    let mut s = t;
    for _ in 0..depth {
        weight *= a.eval(s)?;
        s = g.apply(s)?;
        match term(s)? {
            Some(v) => value += weight * v,
            None => break,
        }
    }
    Ok(SeriesResult {
        value,
        truncation_depth: depth,
        tail_bound: tail,
    })
}

/// Aggregated coefficient `B(t) = b(t) + sum_{j>=1} prod_{k<j} a(g^[k](t)) b(g^[j](t))`
/// of the equivalent infinite-delay equation, with `b(s) = b0` for `s < t0`.
///
/// The result is checked against `b0/(1-a0) <= B(t) <= B0/(1-A0)`; a violation
/// beyond `tol` means the supplied bounds do not describe `a` and `b`.
pub fn big_b(
    a: &FuncExpr,
    b: &FuncExpr,
    g: &DelayFunc,
    t: f64,
    t0: f64,
    bounds: &ParamBounds,
    tol: f64,
) -> Result<SeriesResult, SeriesError> {
    let (depth, tail) = truncation_depth(bounds.A0, bounds.B0, tol)?;
    let res = series_at(t, depth, tail, a, g, |s| {
        if s < t0 {
            Ok(Some(bounds.b0))
        } else {
            b.eval(s).map(Some)
        }
    })?;
    let lower = bounds.b0 / (1.0 - bounds.a0);
    let upper = bounds.B0 / (1.0 - bounds.A0);
    if res.value + res.tail_bound < lower - tol || res.value > upper + tol {
        return Err(SeriesError::Sandwich {
            t,
            value: res.value,
            tail: res.tail_bound,
            lower,
            upper,
        });
    }
    Ok(res)
}
