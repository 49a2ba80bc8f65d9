use std::io::{self, Write};

use serde::Serialize;

use crate::funcspec::{EvalError, FuncExpr};

/// Values of the solution and its derivative before the start time.
#[derive(Debug, Clone, PartialEq)]
pub enum History {
    /// `x = phi` on `(-inf, t0]`, `x' = psi` on `(-inf, t0)`.
    Functions { phi: FuncExpr, psi: FuncExpr },
    /// Zero value and derivative before `t0`, unit value at `t0` (fundamental function).
    UnitJump,
}

impl History {
    pub fn functions(phi: FuncExpr, psi: FuncExpr) -> Self {
        History::Functions { phi, psi }
    }

    /// `x(s)` for `s < t0`; at `s = t0` the left limit.
    pub fn x_before(&self, s: f64) -> Result<f64, EvalError> {
        match self {
            History::Functions { phi, .. } => phi.eval(s),
            History::UnitJump => Ok(0.0),
        }
    }

    /// `x'(s)` for `s < t0`; at `s = t0` the left limit.
    pub fn dx_before(&self, s: f64) -> Result<f64, EvalError> {
        match self {
            History::Functions { psi, .. } => psi.eval(s),
            History::UnitJump => Ok(0.0),
        }
    }

    pub fn initial_value(&self, t0: f64) -> Result<f64, EvalError> {
        match self {
            History::Functions { phi, .. } => phi.eval(t0),
            History::UnitJump => Ok(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    /// `|x|` exceeded the divergence cutoff or became non-finite.
    Diverged {
        t: f64,
    },
    /// Same-step neutral term did not converge under fixed-point iteration.
    LeftContractionRegion {
        t: f64,
    },
    /// A positive state (logistic population) reached zero.
    ReachedZero {
        t: f64,
    },
}

/// Numerical solution on a uniform grid.
///
/// `dx` holds right limits of the derivative at the nodes and `dx_left` the
/// left limits; they differ only where the derivative jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    pub dx_left: Vec<f64>,
    pub history: History,
    pub status: Status,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    /// Position of `t` as `(node, fraction)`; `None` before `t0`.
    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let u = (t - self.t0) / self.dt;
        if u < 0.0 {
            return None;
        }
        let last = self.len() - 1;
        let k = (u.floor() as usize).min(last);
        Some((k, (u - k as f64).clamp(0.0, 1.0)))
    }

    /// `x(t)`: history before `t0`, cubic Hermite between nodes.
    pub fn value_at(&self, t: f64) -> Result<f64, EvalError> {
        match self.locate(t) {
            None => self.history.x_before(t),
            Some((k, theta)) if k + 1 >= self.len() || theta == 0.0 => Ok(self.x[k]),
            Some((k, theta)) => Ok(hermite(
                self.x[k],
                self.dx[k],
                self.x[k + 1],
                self.dx_left[k + 1],
                self.dt,
                theta,
            )),
        }
    }

    /// `x'(t)`: history before `t0`, linear between nodes.
    pub fn derivative_at(&self, t: f64) -> Result<f64, EvalError> {
        match self.locate(t) {
            None => self.history.dx_before(t),
            Some((k, theta)) if k + 1 >= self.len() || theta == 0.0 => Ok(self.dx[k]),
            Some((k, theta)) => Ok((1.0 - theta) * self.dx[k] + theta * self.dx_left[k + 1]),
        }
    }

    /// Delimited text export: `t,x` or `t,x,dx` rows with a header line.
    pub fn write_delimited<W: Write>(&self, mut out: W, with_derivative: bool, sep: char) -> io::Result<()> {
        if with_derivative {
            writeln!(out, "t{sep}x{sep}dx")?;
        } else {
            writeln!(out, "t{sep}x")?;
        }
        for i in 0..self.len() {
            if with_derivative {
                writeln!(out, "{}{sep}{}{sep}{}", self.time(i), self.x[i], self.dx[i])?;
            } else {
                writeln!(out, "{}{sep}{}", self.time(i), self.x[i])?;
            }
        }
        Ok(())
    }
}

pub(crate) fn hermite(x0: f64, d0: f64, x1: f64, d1: f64, h: f64, theta: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * x0 + h10 * h * d0 + h01 * x1 + h11 * h * d1
}
