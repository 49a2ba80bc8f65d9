//! Time-function expressions and the scalar bounds extracted from them.

mod bounds;
mod expr;
mod parse;
mod pattern;

pub use bounds::{
    closed_form_range, conservative_range, constant_value, extract_bounds, sample_range, BoundSource, BoundsError,
    DelayFunc, ExtractedBounds, ParamBounds, MIN_SAMPLES, SAMPLED_DEFLATION, SAMPLED_INFLATION,
};
pub use expr::{Bindings, EvalError, FuncExpr, Node};
pub use parse::ParseError;
pub use pattern::{sinusoid, Sinusoid};
