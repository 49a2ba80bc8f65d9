use serde::Serialize;

use super::trajectory::{Status, Trajectory};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayOptions {
    /// Trailing share of `[t0, T]` that is fitted.
    pub tail_fraction: f64,
    /// Decaying requires the last envelope value below this share of the first.
    pub drop_ratio: f64,
    /// Number of blocks the tail is split into for the envelope.
    pub blocks: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            tail_fraction: 0.5,
            drop_ratio: 0.01,
            blocks: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Decaying,
    Nondecaying,
    Inconclusive,
}

/// Fit of `|x(t)| <= M exp(-gamma (t - t0))` on the tail envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    /// `+inf` when the envelope is identically zero.
    pub gamma_est: f64,
    #[serde(rename = "M_est")]
    pub m_est: f64,
    /// RMS residual of the log-envelope fit.
    pub fit_residual: f64,
    pub verdict: DecayVerdict,
    pub options: DecayOptions,
}

/// Envelope = block maxima of `|x|` over the tail, fitted in log scale at each block's argmax.
pub fn estimate_decay(tr: &Trajectory, opts: &DecayOptions) -> Result<DecayEstimate, SimError> {
    if tr.status != Status::Completed {
        return Err(SimError::NotCompleted(tr.status));
    }
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction < 1.0) {
        return Err(SimError::InvalidArgument(format!(
            "tail fraction must lie in (0, 1), got {}",
            opts.tail_fraction
        )));
    }
    if opts.blocks < 2 {
        return Err(SimError::InvalidArgument("need at least two envelope blocks".into()));
    }
    let n = tr.len();
    let first = ((1.0 - opts.tail_fraction) * (n - 1) as f64).floor() as usize;
    let tail = &tr.x[first..];
    if tail.len() < opts.blocks {
        return Err(SimError::InvalidArgument(format!(
            "tail has {} points, fewer than {} blocks",
            tail.len(),
            opts.blocks
        )));
    }

    let mut envelope = Vec::with_capacity(opts.blocks);
    for b in 0..opts.blocks {
        let lo = b * tail.len() / opts.blocks;
        let hi = (b + 1) * tail.len() / opts.blocks;
        let (k, m) = tail[lo..hi]
            .iter()
            .enumerate()
            .map(|(k, v)| (lo + k, v.abs()))
            .fold((lo, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        envelope.push((tr.time(first + k) - tr.t0, m));
    }

    let (e_first, e_last) = (envelope[0].1, envelope[opts.blocks - 1].1);
    if envelope.iter().all(|&(_, m)| m == 0.0) {
        return Ok(DecayEstimate {
            gamma_est: f64::INFINITY,
            m_est: 0.0,
            fit_residual: 0.0,
            verdict: DecayVerdict::Decaying,
            options: *opts,
        });
    }

    // Blocks that reached exact zero carry no log information.
    let pts: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|&&(_, m)| m > 0.0)
        .map(|&(t, m)| (t, m.ln()))
        .collect();
    let (slope, intercept, residual) = least_squares(&pts);
    let gamma_est = -slope;
    let verdict = if gamma_est > 0.0 && e_last < opts.drop_ratio * e_first {
        DecayVerdict::Decaying
    } else if e_last >= e_first {
        DecayVerdict::Nondecaying
    } else {
        DecayVerdict::Inconclusive
    };
    Ok(DecayEstimate {
        gamma_est,
        m_est: intercept.exp(),
        fit_residual: residual,
        verdict,
        options: *opts,
    })
}

/// `(slope, intercept, rms residual)`; a single point gives a flat line.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, (ss / n).sqrt())
}
