//! Explicit exponential-stability tests for the scalar neutral equation
//! `x'(t) - a(t) x'(g(t)) + b(t) x(h(t)) = f(t)` and a neutral logistic model,
//! with a fixed-step integrator to cross-check them numerically.

// `!(x > y)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod funcspec;
pub mod logistic;
pub mod series;
pub mod simulator;
pub mod sweep;
