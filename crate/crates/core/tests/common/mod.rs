#![allow(dead_code)]

use neutral_stab::funcspec::{DelayFunc, FuncExpr};
use neutral_stab::simulator::NDDEProblem;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn fx(s: &str) -> FuncExpr {
    FuncExpr::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Lag expression with declared bounds; equal bounds mean a constant lag.
pub struct Lag(pub &'static str, pub f64, pub f64);

pub struct Case {
    pub name: &'static str,
    pub a: &'static str,
    pub b: &'static str,
    pub g: Lag,
    pub h: Lag,
}

impl Case {
    pub fn problem(&self, phi: &str, psi: &str) -> NDDEProblem {
        NDDEProblem::new(
            fx(self.a),
            fx(self.b),
            delay(&self.g),
            delay(&self.h),
            fx("0"),
            fx(phi),
            fx(psi),
            0.0,
        )
    }
}

fn delay(l: &Lag) -> DelayFunc {
    if l.1 == l.2 {
        DelayFunc::constant(l.1).unwrap()
    } else {
        DelayFunc::new(fx(l.0), l.1, l.2).unwrap()
    }
}

macro_rules! case {
    ($name:expr, $a:expr, $b:expr, ($g:expr, $g0:expr, $g1:expr), ($h:expr, $h0:expr, $h1:expr)) => {
        Case {
            name: $name,
            a: $a,
            b: $b,
            g: Lag($g, $g0, $g1),
            h: Lag($h, $h0, $h1),
        }
    };
}

/// Problems certified by at least one criterion, all with positive state lag.
pub fn corpus() -> Vec<Case> {
    vec![
        case!("ode_lag", "0", "1", ("0.5", 0.5, 0.5), ("0.3", 0.3, 0.3)),
        case!("const_small", "0.2", "0.5", ("0.5", 0.5, 0.5), ("1", 1.0, 1.0)),
        case!(
            "sine_rate_020",
            "0.6",
            "0.2*(1+0.1*sin(t))",
            ("0.1", 0.1, 0.1),
            ("0.95+0.05*sin(t)", 0.9, 1.0)
        ),
        case!(
            "sine_rate_025",
            "0.6",
            "0.25*(1+0.1*sin(t))",
            ("0.1", 0.1, 0.1),
            ("0.95+0.05*sin(t)", 0.9, 1.0)
        ),
        case!(
            "periodic_neutral",
            "0.1+0.1*sin(t)",
            "0.8",
            ("0.2", 0.2, 0.2),
            ("0.5", 0.5, 0.5)
        ),
        case!(
            "periodic_rate",
            "0.3",
            "1+0.5*cos(2*t)",
            ("0.25", 0.25, 0.25),
            ("0.4", 0.4, 0.4)
        ),
        case!(
            "variable_state_lag",
            "0",
            "0.5",
            ("1", 1.0, 1.0),
            ("1.5+0.5*sin(t)", 1.0, 2.0)
        ),
        case!("const_mid", "0.4", "0.3", ("0.5", 0.5, 0.5), ("1", 1.0, 1.0)),
        case!("const_half", "0.5", "0.4", ("0.3", 0.3, 0.3), ("0.5", 0.5, 0.5)),
        case!(
            "raised_cosine",
            "0.25*(1+cos(t))",
            "0.6",
            ("0.2", 0.2, 0.2),
            ("0.6", 0.6, 0.6)
        ),
        case!("fast_rate", "0.1", "2", ("0.05", 0.05, 0.05), ("0.2", 0.2, 0.2)),
        case!(
            "fast_lag_wobble",
            "0",
            "1+0.5*sin(t)",
            ("1", 1.0, 1.0),
            ("0.5+0.1*sin(3*t)", 0.4, 0.6)
        ),
        case!(
            "slow_neutral",
            "0.3+0.2*sin(0.5*t)",
            "0.5",
            ("0.1", 0.1, 0.1),
            ("0.8", 0.8, 0.8)
        ),
        case!("stiff", "0.05", "3", ("0.02", 0.02, 0.02), ("0.1", 0.1, 0.1)),
        case!(
            "sampled_rate",
            "0.2",
            "abs(sin(t))+0.5",
            ("0.2", 0.2, 0.2),
            ("0.3", 0.3, 0.3)
        ),
        case!("strong_neutral", "0.7", "0.1", ("0.1", 0.1, 0.1), ("2", 2.0, 2.0)),
        case!("long_lag", "0", "0.3", ("1", 1.0, 1.0), ("3", 3.0, 3.0)),
        case!(
            "both_vary",
            "0.2+0.2*sin(t)",
            "0.4+0.1*cos(t)",
            ("0.3", 0.3, 0.3),
            ("0.6+0.1*cos(t)", 0.5, 0.7)
        ),
        case!("boundary_a", "0.5", "0.5", ("0.5", 0.5, 0.5), ("0.5", 0.5, 0.5)),
        case!(
            "wobble_h",
            "0.35",
            "1.2",
            ("0.15", 0.15, 0.15),
            ("0.25+0.05*sin(2*t)", 0.2, 0.3)
        ),
        case!(
            "modulated",
            "0.15",
            "0.9*(1+0.2*sin(t))",
            ("0.4", 0.4, 0.4),
            ("0.7", 0.7, 0.7)
        ),
        case!("tangzou_const", "0.6", "0.4", ("0.1", 0.1, 0.1), ("1", 1.0, 1.0)),
        case!(
            "variable_neutral_lag",
            "0.5",
            "0.5",
            ("0.3+0.1*sin(t)", 0.2, 0.4),
            ("0.5", 0.5, 0.5)
        ),
    ]
}

/// `(phi, psi)` with `phi = c0 + c1 sin(w t + p)` and `psi = phi'`.
pub fn random_history(rng: &mut StdRng) -> (String, String) {
    let c0: f64 = rng.random_range(-1.0..1.0);
    let c1: f64 = rng.random_range(-1.0..1.0);
    let w: f64 = rng.random_range(0.5..3.0);
    let p: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (
        format!("({c0:?}) + ({c1:?})*sin({w:?}*t + {p:?})"),
        format!("({:?})*cos({w:?}*t + {p:?})", c1 * w),
    )
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
