//! Closed-form recognition of `c0 + c1*sin(w*t + phase)` expressions.

use std::f64::consts::FRAC_PI_2;

use super::expr::Node;

/// `offset + amplitude * sin(omega * t + phase)`. A constant has zero amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub offset: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Sinusoid {
    fn constant(c: f64) -> Self {
        Sinusoid {
            offset: c,
            amplitude: 0.0,
            omega: 0.0,
            phase: 0.0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.amplitude == 0.0
    }

    /// Exact infimum and supremum over the whole real line.
    pub fn range(&self) -> (f64, f64) {
        let a = self.amplitude.abs();
        (self.offset - a, self.offset + a)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (self.omega * t + self.phase).sin()
    }

    fn scale(self, c: f64) -> Self {
        if c == 0.0 {
            return Sinusoid::constant(0.0);
        }
        Sinusoid {
            offset: self.offset * c,
            amplitude: self.amplitude * c,
            ..self
        }
    }

    fn add(self, other: Self) -> Option<Self> {
        if other.is_constant() {
            return Some(Sinusoid {
                offset: self.offset + other.offset,
                ..self
            });
        }
        if self.is_constant() {
            return other.add(self);
        }
        if self.omega != other.omega {
            return None;
        }
        // Phasor sum of two tones at the same frequency.
        let re = self.amplitude * self.phase.cos() + other.amplitude * other.phase.cos();
        let im = self.amplitude * self.phase.sin() + other.amplitude * other.phase.sin();
        let offset = self.offset + other.offset;
        if re == 0.0 && im == 0.0 {
            return Some(Sinusoid::constant(offset));
        }
        if self.phase == other.phase {
            return Some(Sinusoid {
                offset,
                amplitude: self.amplitude + other.amplitude,
                omega: self.omega,
                phase: self.phase,
            });
        }
        Some(Sinusoid {
            offset,
            amplitude: re.hypot(im),
            omega: self.omega,
            phase: im.atan2(re),
        })
    }

    fn from_angle(arg: (f64, f64), shift: f64) -> Self {
        let (slope, intercept) = arg;
        if slope == 0.0 {
            return Sinusoid::constant((intercept + shift).sin());
        }
        Sinusoid {
            offset: 0.0,
            amplitude: 1.0,
            omega: slope,
            phase: intercept + shift,
        }
    }
}

/// `(slope, intercept)` when the node is affine in t.
fn affine(node: &Node) -> Option<(f64, f64)> {
    match node {
        Node::Const(c) => Some((0.0, *c)),
        Node::T => Some((1.0, 0.0)),
        Node::Neg(x) => affine(x).map(|(a, b)| (-a, -b)),
        Node::Add(x, y) => {
            let (a1, b1) = affine(x)?;
            let (a2, b2) = affine(y)?;
            Some((a1 + a2, b1 + b2))
        }
        Node::Sub(x, y) => {
            let (a1, b1) = affine(x)?;
            let (a2, b2) = affine(y)?;
            Some((a1 - a2, b1 - b2))
        }
        Node::Mul(x, y) => {
            let (a1, b1) = affine(x)?;
            let (a2, b2) = affine(y)?;
            match (a1 == 0.0, a2 == 0.0) {
                (true, _) => Some((b1 * a2, b1 * b2)),
                (_, true) => Some((a1 * b2, b1 * b2)),
                _ => None,
            }
        }
        Node::Div(x, y) => {
            let (a1, b1) = affine(x)?;
            let (a2, b2) = affine(y)?;
            (a2 == 0.0 && b2 != 0.0).then(|| (a1 / b2, b1 / b2))
        }
        _ => constant_value(node).map(|c| (0.0, c)),
    }
}

fn constant_value(node: &Node) -> Option<f64> {
    let s = sinusoid(node)?;
    s.is_constant().then_some(s.offset)
}

/// Recognize `node` as a constant or a single sinusoid plus offset.
pub fn sinusoid(node: &Node) -> Option<Sinusoid> {
    match node {
        Node::Const(c) => Some(Sinusoid::constant(*c)),
        Node::T => None,
        Node::Neg(x) => sinusoid(x).map(|s| s.scale(-1.0)),
        Node::Add(x, y) => sinusoid(x)?.add(sinusoid(y)?),
        Node::Sub(x, y) => sinusoid(x)?.add(sinusoid(y)?.scale(-1.0)),
        Node::Mul(x, y) => {
            let (sx, sy) = (sinusoid(x)?, sinusoid(y)?);
            if sx.is_constant() {
                Some(sy.scale(sx.offset))
            } else if sy.is_constant() {
                Some(sx.scale(sy.offset))
            } else {
                None
            }
        }
        Node::Div(x, y) => {
            let sy = sinusoid(y)?;
            if !sy.is_constant() || sy.offset == 0.0 {
                return None;
            }
            Some(sinusoid(x)?.scale(1.0 / sy.offset))
        }
        Node::Sin(x) => Some(Sinusoid::from_angle(affine(x)?, 0.0)),
        Node::Cos(x) => Some(Sinusoid::from_angle(affine(x)?, FRAC_PI_2)),
        Node::Exp(x) => constant_value(x).map(|c| Sinusoid::constant(c.exp())),
        Node::Abs(x) => constant_value(x).map(|c| Sinusoid::constant(c.abs())),
        Node::Min(x, y) => Some(Sinusoid::constant(constant_value(x)?.min(constant_value(y)?))),
        Node::Max(x, y) => Some(Sinusoid::constant(constant_value(x)?.max(constant_value(y)?))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::FuncExpr;

    fn rec(s: &str) -> Option<Sinusoid> {
        sinusoid(FuncExpr::parse(s).unwrap().ast())
    }

    #[test]
    fn constants() {
        let s = rec("0.6").unwrap();
        assert!(s.is_constant());
        assert_eq!(s.range(), (0.6, 0.6));
        assert_eq!(rec("max(0.2, 3*2)").unwrap().range(), (6.0, 6.0));
        assert!(rec("sin(0.5)").unwrap().is_constant());
    }

    #[test]
    fn sine_rate_coefficient() {
        let s = rec("0.3*(1+0.1*sin(t))").unwrap();
        let (lo, hi) = s.range();
        assert!((lo - 0.27).abs() < 1e-15);
        assert!((hi - 0.33).abs() < 1e-15);
    }

    #[test]
    fn cos_and_shifted_argument() {
        let s = rec("2 - 0.5*cos(3*t + 1)").unwrap();
        assert_eq!(s.range(), (1.5, 2.5));
        for &t in &[0.0, 0.3, 1.7, -4.0] {
            let direct = FuncExpr::parse("2 - 0.5*cos(3*t + 1)").unwrap().eval(t).unwrap();
            assert!((s.eval(t) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn phasor_sum() {
        let s = rec("sin(t) + cos(t)").unwrap();
        let (lo, hi) = s.range();
        assert!((hi - 2f64.sqrt()).abs() < 1e-14);
        assert!((lo + 2f64.sqrt()).abs() < 1e-14);
        assert!(rec("sin(t) - sin(t)").unwrap().is_constant());
    }

    #[test]
    fn unrecognized() {
        assert!(rec("t").is_none());
        assert!(rec("sin(t)*sin(t)").is_none());
        assert!(rec("sin(t) + sin(2*t)").is_none());
        assert!(rec("sin(t*t)").is_none());
        assert!(rec("abs(sin(t))").is_none());
        assert!(rec("1/sin(t)").is_none());
    }
}
