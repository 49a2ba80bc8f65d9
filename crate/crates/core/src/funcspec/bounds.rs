use serde::Serialize;
use thiserror::Error;

use super::expr::{EvalError, FuncExpr};
use super::pattern::sinusoid;
use crate::simulator::NDDEProblem;

/// Multiplicative widening applied to sampled extrema (upper bounds grow, lower bounds shrink).
pub const SAMPLED_INFLATION: f64 = 1.001;
pub const SAMPLED_DEFLATION: f64 = 0.999;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("neutral coefficient not a contraction: A0 = {a_max} >= 1")]
    NotAContraction { a_max: f64 },
    #[error("neutral coefficient must be nonnegative, got a0 = {a_min}")]
    NegativeNeutral { a_min: f64 },
    #[error("rate coefficient must be positive, got b0 = {b_min}")]
    NonPositiveRate { b_min: f64 },
    #[error("lag {which} = {value} at t = {t} outside declared [{min}, {max}]")]
    LagOutOfBounds {
        which: &'static str,
        t: f64,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("invalid declared lag bounds [{min}, {max}]")]
    InvalidLagDeclaration { min: f64, max: f64 },
    #[error("need at least {MIN_SAMPLES} samples, got {n}")]
    TooFewSamples { n: usize },
    #[error("sampling horizon of length {len} shorter than required {need}")]
    HorizonTooShort { len: f64, need: f64 },
    #[error("parameter bounds violate invariants: {0}")]
    Invariant(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundSource {
    /// Supplied by the user (config override or explicit lag declaration).
    Explicit,
    /// Recognized constant or `c0 + c1*sin(w t + p)` pattern.
    ClosedForm,
    /// Grid min/max, widened by the recorded factors.
    Sampled {
        n_samples: usize,
        inflation: f64,
        deflation: f64,
    },
}

/// Closed-form range when recognized, else `None`.
pub fn closed_form_range(f: &FuncExpr) -> Option<(f64, f64)> {
    sinusoid(f.ast()).map(|s| s.range())
}

/// Constant value when `f` is recognized as constant.
pub fn constant_value(f: &FuncExpr) -> Option<f64> {
    sinusoid(f.ast()).and_then(|s| s.is_constant().then_some(s.offset))
}

/// Raw min/max of `f` over `n` uniformly spaced points of `[lo, hi]` (endpoints included).
pub fn sample_range(f: &FuncExpr, horizon: (f64, f64), n: usize) -> Result<(f64, f64), EvalError> {
    let (lo, hi) = horizon;
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f.eval(lo + step * i as f64)?;
        min = min.min(v);
        max = max.max(v);
    }
    Ok((min, max))
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    let lo = if lo > 0.0 {
        lo * SAMPLED_DEFLATION
    } else {
        lo - (1.0 - SAMPLED_DEFLATION) * lo.abs()
    };
    let hi = if hi > 0.0 {
        hi * SAMPLED_INFLATION
    } else {
        hi + (SAMPLED_INFLATION - 1.0) * hi.abs()
    };
    (lo, hi)
}

/// Range of `f`: exact when recognized, otherwise sampled and widened.
pub fn conservative_range(
    f: &FuncExpr,
    horizon: (f64, f64),
    n_samples: usize,
) -> Result<((f64, f64), BoundSource), EvalError> {
    if let Some(r) = closed_form_range(f) {
        return Ok((r, BoundSource::ClosedForm));
    }
    let raw = sample_range(f, horizon, n_samples)?;
    Ok((
        widen(raw),
        BoundSource::Sampled {
            n_samples,
            inflation: SAMPLED_INFLATION,
            deflation: SAMPLED_DEFLATION,
        },
    ))
}

/// A lag `d(t) = t - g(t)` together with its declared bounds `min <= d(t) <= max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayFunc {
    pub lag: FuncExpr,
    pub declared_min: f64,
    pub declared_max: f64,
    pub source: BoundSource,
}

impl DelayFunc {
    pub fn new(lag: FuncExpr, declared_min: f64, declared_max: f64) -> Result<Self, BoundsError> {
        if !(declared_min >= 0.0 && declared_min <= declared_max && declared_max.is_finite()) {
            return Err(BoundsError::InvalidLagDeclaration {
                min: declared_min,
                max: declared_max,
            });
        }
        Ok(DelayFunc {
            lag,
            declared_min,
            declared_max,
            source: BoundSource::Explicit,
        })
    }

    /// Constant lag `d`.
    pub fn constant(d: f64) -> Result<Self, BoundsError> {
        let mut df = Self::new(FuncExpr::constant(d), d, d)?;
        df.source = BoundSource::ClosedForm;
        Ok(df)
    }

    /// The identity delay `g(t) = t`.
    pub fn identity() -> Self {
        Self::constant(0.0).expect("zero lag is valid")
    }

    /// Derive the declared bounds from the lag itself.
    pub fn infer(lag: FuncExpr, horizon: (f64, f64), n_samples: usize) -> Result<Self, BoundsError> {
        let (raw, closed) = match closed_form_range(&lag) {
            Some(r) => (r, true),
            None => (sample_range(&lag, horizon, n_samples)?, false),
        };
        if raw.0 < 0.0 {
            return Err(BoundsError::LagOutOfBounds {
                which: "lag",
                t: f64::NAN,
                value: raw.0,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        let (lo, hi, source) = if closed {
            (raw.0, raw.1, BoundSource::ClosedForm)
        } else {
            let (lo, hi) = widen(raw);
            let source = BoundSource::Sampled {
                n_samples,
                inflation: SAMPLED_INFLATION,
                deflation: SAMPLED_DEFLATION,
            };
            (lo, hi, source)
        };
        let mut df = Self::new(lag, lo, hi)?;
        df.source = source;
        Ok(df)
    }

    pub fn lag_at(&self, t: f64) -> Result<f64, EvalError> {
        self.lag.eval(t)
    }

    /// The delayed argument `t - d(t)`.
    pub fn apply(&self, t: f64) -> Result<f64, EvalError> {
        Ok(t - self.lag.eval(t)?)
    }

    pub fn is_identity(&self) -> bool {
        self.declared_max == 0.0
    }

    /// Constant lag value, if the lag is recognized as constant.
    pub fn constant_lag(&self) -> Option<f64> {
        constant_value(&self.lag)
    }

    /// Check `declared_min <= d(t) <= declared_max` over the horizon.
    pub fn validate(&self, which: &'static str, horizon: (f64, f64), n: usize) -> Result<(), BoundsError> {
        const SLACK: f64 = 1e-12;
        let out = |t: f64, value: f64| BoundsError::LagOutOfBounds {
            which,
            t,
            value,
            min: self.declared_min,
            max: self.declared_max,
        };
        if let Some((lo, hi)) = closed_form_range(&self.lag) {
            if lo < self.declared_min - SLACK {
                return Err(out(f64::NAN, lo));
            }
            if hi > self.declared_max + SLACK {
                return Err(out(f64::NAN, hi));
            }
            return Ok(());
        }
        let (lo, hi) = horizon;
        let n = n.max(2);
        let step = (hi - lo) / (n - 1) as f64;
        for i in 0..n {
            let t = lo + step * i as f64;
            let v = self.lag.eval(t)?;
            if v < self.declared_min - SLACK || v > self.declared_max + SLACK {
                return Err(out(t, v));
            }
        }
        Ok(())
    }
}

/// Scalar inputs to the stability criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ParamBounds {
    pub a0: f64,
    pub A0: f64,
    pub b0: f64,
    pub B0: f64,
    pub tau: f64,
    pub sigma: f64,
    /// Essential infimum of `t - h(t)`.
    pub h_lag_inf: f64,
}

impl ParamBounds {
    #[allow(non_snake_case)]
    pub fn new(a0: f64, A0: f64, b0: f64, B0: f64, tau: f64, sigma: f64, h_lag_inf: f64) -> Result<Self, BoundsError> {
        let p = ParamBounds {
            a0,
            A0,
            b0,
            B0,
            tau,
            sigma,
            h_lag_inf,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.A0 >= 1.0 {
            return Err(BoundsError::NotAContraction { a_max: self.A0 });
        }
        if self.a0 < 0.0 {
            return Err(BoundsError::NegativeNeutral { a_min: self.a0 });
        }
        if self.b0 <= 0.0 {
            return Err(BoundsError::NonPositiveRate { b_min: self.b0 });
        }
        let ok = self.a0 <= self.A0
            && self.b0 <= self.B0
            && self.tau >= 0.0
            && self.sigma >= 0.0
            && self.h_lag_inf >= 0.0
            && self.h_lag_inf <= self.tau
            && [self.a0, self.A0, self.b0, self.B0, self.tau, self.sigma, self.h_lag_inf]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(BoundsError::Invariant(format!("{self:?}")))
        }
    }
}

/// Bounds together with how each coefficient range was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedBounds {
    pub bounds: ParamBounds,
    pub a_source: BoundSource,
    pub b_source: BoundSource,
    pub g_source: BoundSource,
    pub h_source: BoundSource,
}

/// Extract `a0, A0, b0, B0, tau, sigma` and `inf(t - h(t))` from a problem.
///
/// Recognized constant and sinusoidal coefficients give exact bounds; anything
/// else is sampled over `horizon` and widened. Lags are validated against
/// their declared bounds, which then become `tau`, `sigma` and `h_lag_inf`.
pub fn extract_bounds(
    problem: &NDDEProblem,
    horizon: (f64, f64),
    n_samples: usize,
) -> Result<ExtractedBounds, BoundsError> {
    if n_samples < MIN_SAMPLES {
        return Err(BoundsError::TooFewSamples { n: n_samples });
    }
    let needs_sampling = [&problem.a, &problem.b, &problem.g.lag, &problem.h.lag]
        .iter()
        .any(|f| closed_form_range(f).is_none());
    let len = horizon.1 - horizon.0;
    let need = 10.0 * problem.h.declared_max.max(problem.g.declared_max);
    if needs_sampling && len < need {
        return Err(BoundsError::HorizonTooShort { len, need });
    }

    problem.g.validate("t - g(t)", horizon, n_samples)?;
    problem.h.validate("t - h(t)", horizon, n_samples)?;

    let ((a_lo, a_hi), a_source) = conservative_range(&problem.a, horizon, n_samples)?;
    let ((b_lo, b_hi), b_source) = conservative_range(&problem.b, horizon, n_samples)?;
    let bounds = ParamBounds::new(
        a_lo,
        a_hi,
        b_lo,
        b_hi,
        problem.h.declared_max,
        problem.g.declared_max,
        problem.h.declared_min,
    )?;
    Ok(ExtractedBounds {
        bounds,
        a_source,
        b_source,
        g_source: problem.g.source,
        h_source: problem.h.source,
    })
}
