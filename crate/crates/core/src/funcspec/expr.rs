use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::parse::{self, ParseError};

/// Expression tree over the single variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    T,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
    Abs(Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at t = {t}")]
    DivisionByZero { t: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

impl Node {
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let v = match self {
            Node::Const(c) => *c,
            Node::T => t,
            Node::Neg(x) => -x.eval(t)?,
            Node::Add(x, y) => x.eval(t)? + y.eval(t)?,
            Node::Sub(x, y) => x.eval(t)? - y.eval(t)?,
            Node::Mul(x, y) => x.eval(t)? * y.eval(t)?,
            Node::Div(x, y) => {
                let num = x.eval(t)?;
                let den = y.eval(t)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero { t });
                }
                num / den
            }
            Node::Sin(x) => x.eval(t)?.sin(),
            Node::Cos(x) => x.eval(t)?.cos(),
            Node::Exp(x) => x.eval(t)?.exp(),
            Node::Abs(x) => x.eval(t)?.abs(),
            Node::Min(x, y) => x.eval(t)?.min(y.eval(t)?),
            Node::Max(x, y) => x.eval(t)?.max(y.eval(t)?),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t })
        }
    }
}

// Fully parenthesized so that printing and re-parsing never depends on precedence.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if c.is_sign_negative() => write!(f, "(-{})", -c),
            Node::Const(c) => write!(f, "{c}"),
            Node::T => f.write_str("t"),
            Node::Neg(x) => write!(f, "(-{x})"),
            Node::Add(x, y) => write!(f, "({x}+{y})"),
            Node::Sub(x, y) => write!(f, "({x}-{y})"),
            Node::Mul(x, y) => write!(f, "({x}*{y})"),
            Node::Div(x, y) => write!(f, "({x}/{y})"),
            Node::Sin(x) => write!(f, "sin({x})"),
            Node::Cos(x) => write!(f, "cos({x})"),
            Node::Exp(x) => write!(f, "exp({x})"),
            Node::Abs(x) => write!(f, "abs({x})"),
            Node::Min(x, y) => write!(f, "min({x},{y})"),
            Node::Max(x, y) => write!(f, "max({x},{y})"),
        }
    }
}

/// A parsed scalar function of time.
///
/// Used for coefficients, lags, forcing terms and histories. Immutable once
/// parsed; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncExpr {
    ast: Node,
    source: String,
}

/// Named scalar constants substituted at parse time (e.g. `r` in a sweep template).
pub type Bindings = std::collections::BTreeMap<String, f64>;

impl FuncExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Self::parse_with(text, &Bindings::new())
    }

    pub fn parse_with(text: &str, bindings: &Bindings) -> Result<Self, ParseError> {
        let ast = parse::parse(text, bindings)?;
        Ok(FuncExpr {
            ast,
            source: text.to_string(),
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::from_node(Node::Const(c))
    }

    pub fn from_node(ast: Node) -> Self {
        let source = ast.to_string();
        FuncExpr { ast, source }
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        self.ast.eval(t)
    }

    pub fn ast(&self) -> &Node {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `c * self`, used to build `rho * r(t)` and similar derived coefficients.
    pub fn scaled(&self, c: f64) -> Self {
        Self::from_node(Node::Mul(Box::new(Node::Const(c)), Box::new(self.ast.clone())))
    }

    /// `self + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self::from_node(Node::Add(Box::new(self.ast.clone()), Box::new(Node::Const(c))))
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

impl FromStr for FuncExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FuncExpr::parse(s)
    }
}
