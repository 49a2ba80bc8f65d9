//! Explicit sufficient conditions for exponential (and local asymptotic) stability.
//!
//! All inequalities are strict. Every evaluation returns a [`Verdict`] with
//! both sides and the margin `rhs - lhs`, so callers can apply their own
//! safety factor.

mod check;
mod logistic;
mod tangzou;
mod theorem;
mod verdict;

use thiserror::Error;

use crate::funcspec::{BoundsError, EvalError};

pub use check::{check_all, CheckOptions, CheckReport, Skipped};
pub use logistic::{eval_logistic_cor, eval_logistic_thm, eval_yu_prop1, LogisticMode, LogisticParams};
pub use tangzou::{eval_tangzou, tangzou_n, window_integral_limsup, LimsupMethod, WindowOptions};
pub use theorem::{eval_cor1, eval_cor2, eval_thm1_a, eval_thm1_b, thm1_b_lag_floor, thm1_lhs, ONE_PLUS_INV_E};
pub use verdict::{CriterionId, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("invalid criterion input: {0}")]
    InvalidInput(String),
    #[error("horizon {horizon} shorter than three windows of length {window}; limsup unreliable")]
    HorizonTooShort { horizon: f64, window: f64 },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
