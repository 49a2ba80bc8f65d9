//! Fixed-step Heun integration of neutral equations with state-dependent lookback.
//!
//! The grid stores the solution `x` and both one-sided derivative limits at each
//! node. A delayed argument that lands inside the current step is served from the
//! pending end values; when the neutral lookback lands on the pending derivative
//! itself, the step is solved by fixed-point iteration.

use std::cell::Cell;

use super::trajectory::{hermite, History, Status, Trajectory};
use crate::funcspec::EvalError;

/// Queries closer than this (in units of `dt`) to a node snap to it.
const SNAP: f64 = 1e-9;
const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 100;
pub(crate) const DIVERGENCE_CUTOFF: f64 = 1e12;

/// Right-hand side `x'(t) = F(t, x(t), x(h(t)), x'(g(t)))` with lags `t - g(t)`, `t - h(t)`.
pub(crate) trait Dynamics {
    fn lag_g(&self, t: f64) -> Result<f64, EvalError>;
    fn lag_h(&self, t: f64) -> Result<f64, EvalError>;
    fn derivative(&self, t: f64, x_now: f64, x_h: f64, dx_g: f64) -> Result<f64, EvalError>;
    /// Stop with [`Status::ReachedZero`] when the state leaves `(0, inf)`.
    fn positive_state(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
enum Loc {
    Before,
    Node(usize),
    Inside(usize, f64),
}

/// Read-only view of the grid plus the values being solved for.
struct View<'a> {
    t0: f64,
    dt: f64,
    history: &'a History,
    x: &'a [f64],
    dxl: &'a [f64],
    dxr: &'a [f64],
    /// Value at node `x.len()` while a step is being solved.
    stage_x: Option<f64>,
    /// Unknown derivative: the right limit at `dxr.len()` or the left limit at the stage node.
    pending: f64,
    touched: Cell<bool>,
}

impl View<'_> {
    fn locate(&self, s: f64) -> Loc {
        let u = (s - self.t0) / self.dt;
        let k = u.round();
        if (u - k).abs() < SNAP {
            if k < 0.0 {
                return Loc::Before;
            }
            return Loc::Node(self.clamp(k as usize));
        }
        if u < 0.0 {
            return Loc::Before;
        }
        let k = u.floor() as usize;
        if k >= self.last_node() {
            return Loc::Node(self.last_node());
        }
        Loc::Inside(k, u - k as f64)
    }

    fn last_node(&self) -> usize {
        if self.stage_x.is_some() {
            self.x.len()
        } else {
            self.x.len() - 1
        }
    }

    fn clamp(&self, k: usize) -> usize {
        k.min(self.last_node())
    }

    fn node_x(&self, k: usize) -> f64 {
        if k < self.x.len() {
            self.x[k]
        } else {
            self.stage_x.expect("stage value present")
        }
    }

    fn pending(&self) -> f64 {
        self.touched.set(true);
        self.pending
    }

    fn node_dx_left(&self, k: usize) -> f64 {
        if k < self.x.len() {
            self.dxl[k]
        } else {
            self.pending()
        }
    }

    fn node_dx_right(&self, k: usize) -> f64 {
        if k < self.dxr.len() {
            self.dxr[k]
        } else {
            self.pending()
        }
    }

    fn x_at(&self, s: f64, side: Side) -> Result<f64, EvalError> {
        match self.locate(s) {
            Loc::Before => self.history.x_before(s),
            Loc::Node(0) if side == Side::Left => self.history.x_before(self.t0),
            Loc::Node(k) => Ok(self.node_x(k)),
            Loc::Inside(k, theta) => Ok(hermite(
                self.x[k],
                self.dxr[k],
                self.node_x(k + 1),
                self.node_dx_left(k + 1),
                self.dt,
                theta,
            )),
        }
    }

    fn dx_at(&self, s: f64, side: Side) -> Result<f64, EvalError> {
        match self.locate(s) {
            Loc::Before => self.history.dx_before(s),
            Loc::Node(0) if side == Side::Left => self.history.dx_before(self.t0),
            Loc::Node(k) => Ok(match side {
                Side::Left => self.node_dx_left(k),
                Side::Right => self.node_dx_right(k),
            }),
            Loc::Inside(k, theta) => Ok((1.0 - theta) * self.dxr[k] + theta * self.node_dx_left(k + 1)),
        }
    }

    fn rhs<D: Dynamics>(&self, dynamics: &D, t: f64, x_now: f64, side: Side) -> Result<f64, EvalError> {
        let x_h = self.x_at(t - dynamics.lag_h(t)?, side)?;
        let dx_g = self.dx_at(t - dynamics.lag_g(t)?, side)?;
        dynamics.derivative(t, x_now, x_h, dx_g)
    }
}

enum Solve {
    Value(f64),
    NoContraction,
}

/// Solve `d = F(d)` where `F` may or may not depend on `d`.
fn fixed_point(init: f64, mut eval: impl FnMut(f64) -> Result<(f64, bool), EvalError>) -> Result<Solve, EvalError> {
    let mut d = init;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let (next, touched) = eval(d)?;
        if !touched {
            return Ok(Solve::Value(next));
        }
        if !next.is_finite() {
            return Ok(Solve::NoContraction);
        }
        if (next - d).abs() <= FIXED_POINT_TOL * next.abs().max(1.0) {
            return Ok(Solve::Value(next));
        }
        d = next;
    }
    Ok(Solve::NoContraction)
}

struct Grid<'h> {
    t0: f64,
    dt: f64,
    history: &'h History,
    x: Vec<f64>,
    dxl: Vec<f64>,
    dxr: Vec<f64>,
}

impl Grid<'_> {
    /// Derivative at time `t` with state `x_now`, seen from `side`.
    /// With `stage_x` set, node `x.len()` is the pending end of the current step.
    fn solve<D: Dynamics>(
        &self,
        dynamics: &D,
        t: f64,
        x_now: f64,
        stage_x: Option<f64>,
        side: Side,
        guess: f64,
    ) -> Result<Solve, EvalError> {
        fixed_point(guess, |d| {
            let view = View {
                t0: self.t0,
                dt: self.dt,
                history: self.history,
                x: &self.x,
                dxl: &self.dxl,
                dxr: &self.dxr,
                stage_x,
                pending: d,
                touched: Cell::new(false),
            };
            let v = view.rhs(dynamics, t, x_now, side)?;
            Ok((v, view.touched.get()))
        })
    }

    fn into_trajectory(self, status: Status) -> Trajectory {
        let Grid {
            t0,
            dt,
            history,
            x,
            mut dxl,
            mut dxr,
        } = self;
        dxl.truncate(x.len());
        dxr.resize(x.len(), f64::NAN);
        Trajectory {
            t0,
            dt,
            x,
            dx: dxr,
            dx_left: dxl,
            history: history.clone(),
            status,
        }
    }
}

/// Integrate on `t0 + i dt`, `i = 0..=steps`.
pub(crate) fn run<D: Dynamics>(
    dynamics: &D,
    history: &History,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Trajectory, EvalError> {
    let x_start = history.initial_value(t0)?;
    let mut grid = Grid {
        t0,
        dt,
        history,
        x: Vec::with_capacity(steps + 1),
        dxl: Vec::with_capacity(steps + 1),
        dxr: Vec::with_capacity(steps + 1),
    };
    grid.x.push(x_start);
    grid.dxl.push(history.dx_before(t0)?);
    if dynamics.positive_state() && !(x_start > 0.0) {
        return Ok(grid.into_trajectory(Status::ReachedZero { t: t0 }));
    }
    match grid.solve(dynamics, t0, x_start, None, Side::Right, grid.dxl[0])? {
        Solve::Value(d) => grid.dxr.push(d),
        Solve::NoContraction => return Ok(grid.into_trajectory(Status::LeftContractionRegion { t: t0 })),
    }

    for n in 0..steps {
        let t_next = t0 + dt * (n + 1) as f64;
        let (x_n, d0) = (grid.x[n], grid.dxr[n]);
        // Predictor, two corrector passes, then the left limit at the accepted end value.
        let mut x_end = x_n + dt * d0;
        let mut d_end = d0;
        let mut lost = false;
        for pass in 0..3 {
            match grid.solve(dynamics, t_next, x_end, Some(x_end), Side::Left, d_end)? {
                Solve::Value(d) => d_end = d,
                Solve::NoContraction => {
                    lost = true;
                    break;
                }
            }
            if pass < 2 {
                x_end = x_n + 0.5 * dt * (d0 + d_end);
            }
        }
        if lost {
            return Ok(grid.into_trajectory(Status::LeftContractionRegion { t: t_next }));
        }
        grid.x.push(x_end);
        grid.dxl.push(d_end);
        if !x_end.is_finite() || x_end.abs() > DIVERGENCE_CUTOFF {
            return Ok(grid.into_trajectory(Status::Diverged { t: t_next }));
        }
        if dynamics.positive_state() && x_end <= 0.0 {
            return Ok(grid.into_trajectory(Status::ReachedZero { t: t_next }));
        }
        match grid.solve(dynamics, t_next, x_end, None, Side::Right, d_end)? {
            Solve::Value(d) => grid.dxr.push(d),
            Solve::NoContraction => return Ok(grid.into_trajectory(Status::LeftContractionRegion { t: t_next })),
        }
    }
    Ok(grid.into_trajectory(Status::Completed))
}
