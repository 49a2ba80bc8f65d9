//! Explicit exponential-stability tests for `x'(t) - a(t) x'(g(t)) = -b(t) x(h(t))`.

use std::f64::consts::E;

use super::verdict::{CriterionId, Verdict};
use crate::funcspec::ParamBounds;

/// `1 + 1/e`, the widening factor of the part (b) tests.
pub const ONE_PLUS_INV_E: f64 = 1.0 + 1.0 / E;

/// Left-hand side shared by both parts of the main test:
/// `tau*B0 + sigma*A0*B0^2*(1 - a0) / ((1 - A0)^2 * b0)`.
pub fn thm1_lhs(p: &ParamBounds) -> f64 {
    p.tau * p.B0 + neutral_term(p)
}

// Exactly zero when either the neutral coefficient or its lag vanishes.
fn neutral_term(p: &ParamBounds) -> f64 {
    if p.sigma == 0.0 || p.A0 == 0.0 {
        return 0.0;
    }
    let one_minus = 1.0 - p.A0;
    p.sigma * p.A0 * p.B0 * p.B0 * (1.0 - p.a0) / (one_minus * one_minus * p.b0)
}

pub fn eval_thm1_a(p: &ParamBounds) -> Verdict {
    Verdict::new(CriterionId::Thm1A, thm1_lhs(p), 1.0 - p.A0, true)
}

/// Lag floor `(1 - A0) / (e * B0)` required by part (b).
pub fn thm1_b_lag_floor(p: &ParamBounds) -> f64 {
    (1.0 - p.A0) / (E * p.B0)
}

pub fn eval_thm1_b(p: &ParamBounds) -> Verdict {
    let floor = thm1_b_lag_floor(p);
    let pre = p.h_lag_inf >= floor;
    let v = Verdict::new(CriterionId::Thm1B, thm1_lhs(p), ONE_PLUS_INV_E * (1.0 - p.A0), pre);
    if pre {
        v
    } else {
        v.with_note(format!(
            "lag precondition fails: inf(t-h(t)) = {} < (1-A0)/(e*B0) = {floor}",
            p.h_lag_inf
        ))
    }
}

/// Constant-coefficient tests `x'(t) - a x'(g(t)) = -b x(h(t))`, parts (a) and (b).
pub fn eval_cor1(a: f64, b: f64, tau: f64, sigma: f64, h_lag_inf: f64) -> (Verdict, Verdict) {
    let neutral = if sigma == 0.0 || a == 0.0 {
        0.0
    } else {
        sigma * a * b / (1.0 - a)
    };
    let lhs = tau * b + neutral;
    let part_a = Verdict::new(CriterionId::Cor1A, lhs, 1.0 - a, true);

    let floor = (1.0 - a) / (E * b);
    let pre = h_lag_inf >= floor;
    let mut part_b = Verdict::new(CriterionId::Cor1B, lhs, ONE_PLUS_INV_E * (1.0 - a), pre);
    if !pre {
        part_b = part_b.with_note(format!(
            "lag precondition fails: inf(t-h(t)) = {h_lag_inf} < (1-a)/(e*b) = {floor}"
        ));
        if lhs < part_b.rhs {
            part_b = part_b.with_note(
                "inequality alone would hold (as in the g(t)=t comparison with Myshkis' 3/2 test), \
                 but the lag precondition is enforced",
            );
        }
    }
    (part_a, part_b)
}

/// Non-delayed rate term `x'(t) - a(t) x'(g(t)) = -b(t) x(t)`.
pub fn eval_cor2(p: &ParamBounds) -> Verdict {
    let lhs = if p.sigma == 0.0 || p.A0 == 0.0 {
        0.0
    } else {
        let one_minus = 1.0 - p.A0;
        p.sigma * p.A0 * p.B0 * p.B0 * (1.0 - p.a0) / (one_minus.powi(3) * p.b0)
    };
    Verdict::new(CriterionId::Cor2, lhs, 1.0, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bounds for a = 0.6 with a sine-modulated rate: a = 0.6, b = r(1 + 0.1 sin t), tau = 1, sigma = 0.1.
    fn ex2(r: f64, h_inf: f64) -> ParamBounds {
        ParamBounds::new(0.6, 0.6, 0.9 * r, 1.1 * r, 1.0, 0.1, h_inf).unwrap()
    }

    // Hand algebra: 1.1 r + 0.1*0.6*1.21 r^2 * 0.4 / (0.16 * 0.9 r) = (1.1 + 0.0290400/0.144) r.
    const SLOPE: f64 = 1.1 + 0.02904 / 0.144;

    #[test]
    fn thm1_a_sine_rate() {
        assert!((SLOPE - 1.301_666_666_666_666_7).abs() < 1e-14);
        let v = eval_thm1_a(&ex2(0.3, 0.9));
        assert!((v.lhs - SLOPE * 0.3).abs() < 1e-12);
        assert!((v.lhs - 0.3905).abs() < 1e-12);
        assert_eq!(v.rhs, 1.0 - 0.6);
        assert!(v.satisfied);
        let v = eval_thm1_a(&ex2(0.31, 0.9));
        assert!((v.lhs - 0.403_516_666_666_666_7).abs() < 1e-12);
        assert!(!v.satisfied);
    }

    #[test]
    fn thm1_a_without_neutral_term() {
        let p = ParamBounds::new(0.0, 0.0, 0.5, 1.0, 0.5, 0.3, 0.5).unwrap();
        let v = eval_thm1_a(&p);
        assert_eq!(v.lhs, 0.5);
        assert_eq!(v.rhs, 1.0);
        assert!(v.satisfied);
    }

    #[test]
    fn thm1_b_sine_rate() {
        let v = eval_thm1_b(&ex2(0.2, 0.9));
        assert!(v.precondition_ok);
        assert!((v.rhs - 0.547_151_776_468_576_9).abs() < 1e-12);
        assert!(v.satisfied);
        let v = eval_thm1_b(&ex2(0.43, 0.9));
        assert!((v.lhs - 0.559_716_666_666_666_7).abs() < 1e-12);
        assert!(!v.satisfied);
        // Lag floor 0.4 / (1.1 e r) against 0.9 (variable lag) and 1 (constant lag).
        assert!(!eval_thm1_b(&ex2(0.148, 0.9)).precondition_ok);
        assert!(eval_thm1_b(&ex2(0.149, 0.9)).precondition_ok);
        assert!(!eval_thm1_b(&ex2(0.133, 1.0)).precondition_ok);
        assert!(eval_thm1_b(&ex2(0.134, 1.0)).precondition_ok);
    }

    #[test]
    fn cor1_cases() {
        let (a, _) = eval_cor1(0.5, 1.0, 0.2, 0.1, 0.2);
        assert!((a.lhs - 0.3).abs() < 1e-15);
        assert_eq!(a.rhs, 0.5);
        assert!(a.satisfied);

        let (a, _) = eval_cor1(0.0, 0.9, 1.05, 0.3, 1.05);
        assert!((a.lhs - 0.945).abs() < 1e-15 && a.rhs == 1.0 && a.satisfied);

        // sigma = 0: part (b) is b*tau/(1-a) < 1 + 1/e.
        let (a_part, b_part) = eval_cor1(0.3, 1.0, 0.9, 0.0, 0.9);
        assert_eq!(a_part.lhs, 0.9);
        assert!(b_part.precondition_ok);
        assert_eq!(b_part.lhs / 0.7 < ONE_PLUS_INV_E, b_part.satisfied);
        assert!(b_part.satisfied);
    }

    #[test]
    fn cor1_b_precondition_noted() {
        let (_, b) = eval_cor1(0.3, 1.0, 0.9, 0.0, 0.1);
        assert!(!b.precondition_ok && !b.satisfied);
        assert_eq!(b.notes.len(), 2);
    }

    #[test]
    fn cor2_cases() {
        let p = |sigma| ParamBounds::new(0.5, 0.5, 1.0, 1.0, 0.0, sigma, 0.0).unwrap();
        let v = eval_cor2(&p(0.2));
        assert!((v.lhs - 0.4).abs() < 1e-15 && v.satisfied);
        let v = eval_cor2(&p(0.3));
        assert!((v.lhs - 0.6).abs() < 1e-15 && (v.margin - 0.4).abs() < 1e-15);
        let q = ParamBounds::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.3, 0.0).unwrap();
        assert_eq!(eval_cor2(&q).lhs, 0.0);
    }
}
