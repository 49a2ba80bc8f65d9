//! Criterion thresholds over one scalar parameter.
//!
//! The parameter range is scanned first; a criterion whose satisfied set on the
//! scan is a half-line or a single interval has each boundary bisected, anything
//! else is reported as non-monotone together with the scan.

use serde::Serialize;
use thiserror::Error;

use crate::criteria::{CriterionId, Verdict};

pub const MIN_SCAN_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("template failed at {parameter} = {value}: {message}")]
    Template {
        parameter: String,
        value: f64,
        message: String,
    },
}

impl SweepError {
    fn at(spec: &SweepSpec, value: f64, message: impl ToString) -> Self {
        SweepError::Template {
            parameter: spec.parameter.clone(),
            value,
            message: message.to_string(),
        }
    }
}

/// Parameterized family of problems: parameter value to verdicts.
pub trait Template {
    type Error: ToString;
    fn verdicts(&self, value: f64) -> Result<Vec<Verdict>, Self::Error>;
}

impl<F, E> Template for F
where
    F: Fn(f64) -> Result<Vec<Verdict>, E>,
    E: ToString,
{
    type Error = E;
    fn verdicts(&self, value: f64) -> Result<Vec<Verdict>, E> {
        self(value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub range: (f64, f64),
    pub criteria: Vec<CriterionId>,
    pub tol: f64,
    pub scan_points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let (lo, hi) = self.range;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(SweepError::InvalidSpec(format!(
                "range needs lo < hi, got ({lo}, {hi})"
            )));
        }
        if !(self.tol > 0.0) {
            return Err(SweepError::InvalidSpec(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.scan_points < MIN_SCAN_POINTS {
            return Err(SweepError::InvalidSpec(format!(
                "need at least {MIN_SCAN_POINTS} scan points, got {}",
                self.scan_points
            )));
        }
        Ok(())
    }

    /// `lo + (hi - lo) i / n` for `i = 1..=n`; the lower end is excluded.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.range;
        (1..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Direction {
    /// No scan point satisfies the criterion.
    NoneInRange,
    /// Every scan point satisfies it.
    Everywhere,
    SatisfiedBelow,
    SatisfiedAbove,
    SatisfiedInside {
        lo: f64,
        hi: f64,
    },
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub value: f64,
    pub satisfied: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub criterion: CriterionId,
    /// Boundary of the satisfied set: one value for half-lines, two for an interval.
    pub thresholds: Vec<f64>,
    pub direction: Direction,
    /// Every boundary checked at `threshold -/+ 2 tol` with opposite verdicts.
    pub bracket_verified: bool,
    /// Scan attached when the satisfied set is not a half-line or interval.
    pub scan: Option<Vec<ScanPoint>>,
}

fn status<T: Template>(spec: &SweepSpec, template: &T, value: f64) -> Result<Vec<Verdict>, SweepError> {
    template.verdicts(value).map_err(|e| SweepError::at(spec, value, e))
}

fn satisfied(verdicts: &[Verdict], id: CriterionId) -> bool {
    verdicts.iter().any(|v| v.criterion == id && v.satisfied)
}

/// Bisect `[lo, hi]` where the criterion is `sat_lo` at `lo` and not at `hi`; returns the midpoint.
fn bisect<T: Template>(
    spec: &SweepSpec,
    template: &T,
    id: CriterionId,
    mut lo: f64,
    mut hi: f64,
    sat_lo: bool,
) -> Result<f64, SweepError> {
    while hi - lo > spec.tol {
        let mid = 0.5 * (lo + hi);
        if satisfied(&status(spec, template, mid)?, id) == sat_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `true` when the verdicts just below and above `x` are `below` and `!below`.
fn verify<T: Template>(spec: &SweepSpec, template: &T, id: CriterionId, x: f64, below: bool) -> bool {
    let d = 2.0 * spec.tol;
    match (template.verdicts(x - d), template.verdicts(x + d)) {
        (Ok(l), Ok(r)) => satisfied(&l, id) == below && satisfied(&r, id) != below,
        _ => false,
    }
}

pub fn find_threshold<T: Template>(spec: &SweepSpec, template: &T) -> Result<Vec<ThresholdResult>, SweepError> {
    spec.validate()?;
    let grid = spec.grid(spec.scan_points);
    let scans: Vec<Vec<Verdict>> = grid
        .iter()
        .map(|&v| status(spec, template, v))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(spec.criteria.len());
    for &id in &spec.criteria {
        let scan: Vec<ScanPoint> = grid
            .iter()
            .zip(&scans)
            .map(|(&value, vs)| {
                let v = vs.iter().find(|v| v.criterion == id);
                ScanPoint {
                    value,
                    satisfied: v.is_some_and(|v| v.satisfied),
                    margin: v.map_or(f64::NAN, |v| v.margin),
                }
            })
            .collect();
        let sat: Vec<bool> = scan.iter().map(|p| p.satisfied).collect();
        let changes: Vec<usize> = (1..sat.len()).filter(|&i| sat[i] != sat[i - 1]).collect();
        let first = sat[0];

        let result = match (changes.as_slice(), first) {
            ([], false) => ThresholdResult {
                criterion: id,
                thresholds: vec![],
                direction: Direction::NoneInRange,
                bracket_verified: true,
                scan: None,
            },
            ([], true) => ThresholdResult {
                criterion: id,
                thresholds: vec![],
                direction: Direction::Everywhere,
                bracket_verified: true,
                scan: None,
            },
            (&[i], sat_lo) => {
                let x = bisect(spec, template, id, grid[i - 1], grid[i], sat_lo)?;
                ThresholdResult {
                    criterion: id,
                    thresholds: vec![x],
                    direction: if sat_lo {
                        Direction::SatisfiedBelow
                    } else {
                        Direction::SatisfiedAbove
                    },
                    bracket_verified: verify(spec, template, id, x, sat_lo),
                    scan: None,
                }
            }
            (&[i, j], false) => {
                let lo = bisect(spec, template, id, grid[i - 1], grid[i], false)?;
                let hi = bisect(spec, template, id, grid[j - 1], grid[j], true)?;
                ThresholdResult {
                    criterion: id,
                    thresholds: vec![lo, hi],
                    direction: Direction::SatisfiedInside { lo, hi },
                    bracket_verified: verify(spec, template, id, lo, false) && verify(spec, template, id, hi, true),
                    scan: None,
                }
            }
            _ => ThresholdResult {
                criterion: id,
                thresholds: vec![],
                direction: Direction::NonMonotone,
                bracket_verified: false,
                scan: Some(scan),
            },
        };
        out.push(result);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub value: f64,
    pub criterion: CriterionId,
    /// `false` also when the template produced no verdict for the criterion.
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub precondition_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub criteria: Vec<CriterionId>,
    pub rows: Vec<GridRow>,
}

/// Every criterion at every point of `spec.grid(spec.scan_points)`.
pub fn sweep_grid<T: Template>(spec: &SweepSpec, template: &T) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let mut rows = Vec::new();
    if !spec.criteria.is_empty() {
        for value in spec.grid(spec.scan_points) {
            let verdicts = status(spec, template, value)?;
            for &criterion in &spec.criteria {
                let row = match verdicts.iter().find(|v| v.criterion == criterion) {
                    Some(v) => GridRow {
                        value,
                        criterion,
                        satisfied: v.satisfied,
                        lhs: v.lhs,
                        rhs: v.rhs,
                        margin: v.margin,
                        precondition_ok: v.precondition_ok,
                    },
                    None => GridRow {
                        value,
                        criterion,
                        satisfied: false,
                        lhs: f64::NAN,
                        rhs: f64::NAN,
                        margin: f64::NAN,
                        precondition_ok: false,
                    },
                };
                rows.push(row);
            }
        }
    }
    Ok(SweepTable {
        parameter: spec.parameter.clone(),
        criteria: spec.criteria.clone(),
        rows,
    })
}
