//! TOML problem files.
//!
//! ```toml
//! [equation]
//! kind = "neutral"            # or "logistic"
//! a = "0.6"
//! b = "r*(1+0.1*sin(t))"
//! lag_g = "0.1"               # t - g(t)
//! lag_h = "0.95+0.05*sin(t)"  # t - h(t)
//! lag_h_min = 0.9             # optional declared bounds, inferred when absent
//! lag_h_max = 1.0
//! phi = "1"
//!
//! [params]
//! r = 0.2
//! ```
//!
//! Scalars accept a number or an expression string in the bound parameters.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::criteria::CriterionId;
use crate::funcspec::{constant_value, Bindings, BoundSource, DelayFunc, ExtractedBounds, FuncExpr, ParamBounds};
use crate::logistic::LogisticProblem;
use crate::simulator::{DecayOptions, NDDEProblem};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn resolve(&self, env: &Bindings) -> Result<f64, CliError> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Expr(text) => {
                let e = FuncExpr::parse_with(text, env).map_err(|e| CliError::Config(format!("{text:?}: {e}")))?;
                constant_value(&e).ok_or_else(|| CliError::Config(format!("scalar {text:?} must not depend on t")))
            }
        }
    }
}

fn resolve_opt(s: &Option<Scalar>, env: &Bindings) -> Result<Option<f64>, CliError> {
    s.as_ref().map(|s| s.resolve(env)).transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    Neutral,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct EquationSection {
    #[serde(default)]
    pub kind: Kind,
    pub a: Option<String>,
    pub b: Option<String>,
    pub r: Option<String>,
    pub K: Option<Scalar>,
    pub rho: Option<Scalar>,
    pub lag_g: Option<String>,
    pub lag_h: Option<String>,
    pub lag_g_min: Option<Scalar>,
    pub lag_g_max: Option<Scalar>,
    pub lag_h_min: Option<Scalar>,
    pub lag_h_max: Option<Scalar>,
    pub f: Option<String>,
    pub phi: Option<String>,
    pub psi: Option<String>,
    pub t0: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct BoundsSection {
    pub a0: Option<Scalar>,
    pub A0: Option<Scalar>,
    pub b0: Option<Scalar>,
    pub B0: Option<Scalar>,
    pub tau: Option<Scalar>,
    pub sigma: Option<Scalar>,
    pub h_lag_inf: Option<Scalar>,
    /// Sampling window `[start, end]` for bound extraction.
    pub horizon: Option<[Scalar; 2]>,
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SimulateSection {
    pub T: Option<Scalar>,
    pub dt: Option<Scalar>,
    pub tail_fraction: Option<f64>,
    pub drop_ratio: Option<f64>,
    pub blocks: Option<usize>,
    /// Start of the fundamental function.
    pub s: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub range: [Scalar; 2],
    pub tol: Option<f64>,
    pub scan_points: Option<usize>,
    pub criteria: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<Format>,
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub equation: EquationSection,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// A parsed equation with all parameters substituted.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Neutral(NDDEProblem),
    Logistic(LogisticProblem),
}

impl Problem {
    pub fn t0(&self) -> f64 {
        match self {
            Problem::Neutral(p) => p.t0,
            Problem::Logistic(p) => p.t0,
        }
    }

    pub fn lags(&self) -> (&DelayFunc, &DelayFunc) {
        match self {
            Problem::Neutral(p) => (&p.g, &p.h),
            Problem::Logistic(p) => (&p.g, &p.h),
        }
    }

    /// Largest declared lag.
    pub fn max_lag(&self) -> f64 {
        let (g, h) = self.lags();
        g.declared_max.max(h.declared_max)
    }

    /// Smallest positive declared lag bound, if any.
    pub fn min_positive_lag(&self) -> Option<f64> {
        let (g, h) = self.lags();
        [g.declared_max, h.declared_max]
            .into_iter()
            .filter(|&l| l > 0.0)
            .reduce(f64::min)
    }
}

pub const DEFAULT_N_SAMPLES: usize = 100_000;
pub const DEFAULT_SWEEP_TOL: f64 = 1e-6;
pub const DEFAULT_SCAN_POINTS: usize = 50;

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn bindings(&self) -> Bindings {
        self.params.clone()
    }

    fn expr(
        &self,
        field: &str,
        text: Option<&String>,
        default: Option<&str>,
        env: &Bindings,
    ) -> Result<FuncExpr, CliError> {
        let text = match (text, default) {
            (Some(t), _) => t.as_str(),
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::Config(format!("[equation] missing `{field}`"))),
        };
        FuncExpr::parse_with(text, env).map_err(|e| CliError::Config(format!("[equation] {field}: {e}")))
    }

    pub fn t0(&self, env: &Bindings) -> Result<f64, CliError> {
        Ok(resolve_opt(&self.equation.t0, env)?.unwrap_or(0.0))
    }

    /// Window used to sample coefficients and lags.
    pub fn sampling_horizon(&self, env: &Bindings, t0: f64, max_lag: f64) -> Result<(f64, f64), CliError> {
        match &self.bounds.horizon {
            Some([lo, hi]) => Ok((lo.resolve(env)?, hi.resolve(env)?)),
            None => Ok((t0, t0 + (20.0 * max_lag).max(200.0))),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.bounds.n_samples.unwrap_or(DEFAULT_N_SAMPLES)
    }

    fn delay(
        &self,
        which: &str,
        lag: Option<&String>,
        min: &Option<Scalar>,
        max: &Option<Scalar>,
        env: &Bindings,
        t0: f64,
    ) -> Result<DelayFunc, CliError> {
        let lag = self.expr(which, lag, Some("0"), env)?;
        match (resolve_opt(min, env)?, resolve_opt(max, env)?) {
            (Some(lo), Some(hi)) => Ok(DelayFunc::new(lag, lo, hi)?),
            (None, None) => {
                // Inference needs a window; lags are bounded so a fixed long window suffices.
                let horizon = match &self.bounds.horizon {
                    Some([lo, hi]) => (lo.resolve(env)?, hi.resolve(env)?),
                    None => (t0, t0 + 200.0),
                };
                Ok(DelayFunc::infer(lag, horizon, self.n_samples())?)
            }
            _ => Err(CliError::Config(format!(
                "[equation] declare both {which}_min and {which}_max or neither"
            ))),
        }
    }

    /// Build the problem with `env` substituted for the parameters.
    pub fn problem(&self, env: &Bindings) -> Result<Problem, CliError> {
        let eq = &self.equation;
        let t0 = self.t0(env)?;
        let g = self.delay("lag_g", eq.lag_g.as_ref(), &eq.lag_g_min, &eq.lag_g_max, env, t0)?;
        let h = self.delay("lag_h", eq.lag_h.as_ref(), &eq.lag_h_min, &eq.lag_h_max, env, t0)?;
        let psi = self.expr("psi", eq.psi.as_ref(), Some("0"), env)?;
        match eq.kind {
            Kind::Neutral => {
                let reject = [("r", eq.r.is_some()), ("K", eq.K.is_some()), ("rho", eq.rho.is_some())];
                if let Some((name, _)) = reject.iter().find(|(_, set)| *set) {
                    return Err(CliError::Config(format!(
                        "[equation] `{name}` only applies to kind = \"logistic\""
                    )));
                }
                Ok(Problem::Neutral(NDDEProblem::new(
                    self.expr("a", eq.a.as_ref(), Some("0"), env)?,
                    self.expr("b", eq.b.as_ref(), None, env)?,
                    g,
                    h,
                    self.expr("f", eq.f.as_ref(), Some("0"), env)?,
                    self.expr("phi", eq.phi.as_ref(), None, env)?,
                    psi,
                    t0,
                )))
            }
            Kind::Logistic => {
                let reject = [("a", eq.a.is_some()), ("b", eq.b.is_some()), ("f", eq.f.is_some())];
                if let Some((name, _)) = reject.iter().find(|(_, set)| *set) {
                    return Err(CliError::Config(format!(
                        "[equation] `{name}` only applies to kind = \"neutral\""
                    )));
                }
                let k = resolve_opt(&eq.K, env)?.ok_or_else(|| CliError::Config("[equation] missing `K`".into()))?;
                let rho = resolve_opt(&eq.rho, env)?.unwrap_or(0.0);
                let p = LogisticProblem::new(
                    self.expr("r", eq.r.as_ref(), None, env)?,
                    k,
                    rho,
                    g,
                    h,
                    self.expr("phi", eq.phi.as_ref(), None, env)?,
                    psi,
                    t0,
                )
                .map_err(|e| CliError::Config(e.to_string()))?;
                Ok(Problem::Logistic(p))
            }
        }
    }

    /// Explicit bounds that dominate extraction; `None` when nothing is overridden.
    pub fn bound_overrides(&self, env: &Bindings) -> Result<BoundOverrides, CliError> {
        let b = &self.bounds;
        Ok(BoundOverrides {
            a0: resolve_opt(&b.a0, env)?,
            a_max: resolve_opt(&b.A0, env)?,
            b0: resolve_opt(&b.b0, env)?,
            b_max: resolve_opt(&b.B0, env)?,
            tau: resolve_opt(&b.tau, env)?,
            sigma: resolve_opt(&b.sigma, env)?,
            h_lag_inf: resolve_opt(&b.h_lag_inf, env)?,
        })
    }

    pub fn decay_options(&self) -> DecayOptions {
        let d = DecayOptions::default();
        DecayOptions {
            tail_fraction: self.simulate.tail_fraction.unwrap_or(d.tail_fraction),
            drop_ratio: self.simulate.drop_ratio.unwrap_or(d.drop_ratio),
            blocks: self.simulate.blocks.unwrap_or(d.blocks),
        }
    }

    /// Criteria named in `[sweep]`, or the defaults for the equation kind.
    pub fn sweep_criteria(&self) -> Result<Vec<CriterionId>, CliError> {
        match self.sweep.as_ref().and_then(|s| s.criteria.as_ref()) {
            Some(names) => names
                .iter()
                .map(|n| n.parse().map_err(|e: String| CliError::Config(e)))
                .collect(),
            None => Ok(match self.equation.kind {
                Kind::Neutral => vec![
                    CriterionId::Thm1A,
                    CriterionId::Thm1B,
                    CriterionId::Cor1A,
                    CriterionId::Cor1B,
                    CriterionId::Cor2,
                    CriterionId::Tangzou1,
                    CriterionId::Tangzou2,
                ],
                Kind::Logistic => CriterionId::ALL.to_vec(),
            }),
        }
    }
}

/// Bound values given explicitly in the config.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundOverrides {
    pub a0: Option<f64>,
    #[serde(rename = "A0")]
    pub a_max: Option<f64>,
    pub b0: Option<f64>,
    #[serde(rename = "B0")]
    pub b_max: Option<f64>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub h_lag_inf: Option<f64>,
}

impl BoundOverrides {
    pub fn is_empty(&self) -> bool {
        *self == BoundOverrides::default()
    }

    pub fn is_complete(&self) -> bool {
        [
            self.a0,
            self.a_max,
            self.b0,
            self.b_max,
            self.tau,
            self.sigma,
            self.h_lag_inf,
        ]
        .iter()
        .all(Option::is_some)
    }

    /// All seven values, when every one is given.
    pub fn complete(&self) -> Option<Result<ExtractedBounds, CliError>> {
        if !self.is_complete() {
            return None;
        }
        let u = |v: Option<f64>| v.unwrap_or(f64::NAN);
        Some(
            ParamBounds::new(
                u(self.a0),
                u(self.a_max),
                u(self.b0),
                u(self.b_max),
                u(self.tau),
                u(self.sigma),
                u(self.h_lag_inf),
            )
            .map(|bounds| ExtractedBounds {
                bounds,
                a_source: BoundSource::Explicit,
                b_source: BoundSource::Explicit,
                g_source: BoundSource::Explicit,
                h_source: BoundSource::Explicit,
            })
            .map_err(CliError::from),
        )
    }

    /// Overlay onto extracted bounds; overridden pairs are marked explicit.
    pub fn apply(&self, mut e: ExtractedBounds) -> Result<ExtractedBounds, CliError> {
        let p = &mut e.bounds;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.a0, self.a0);
        set(&mut p.A0, self.a_max);
        set(&mut p.b0, self.b0);
        set(&mut p.B0, self.b_max);
        set(&mut p.tau, self.tau);
        set(&mut p.sigma, self.sigma);
        set(&mut p.h_lag_inf, self.h_lag_inf);
        if self.a0.is_some() || self.a_max.is_some() {
            e.a_source = BoundSource::Explicit;
        }
        if self.b0.is_some() || self.b_max.is_some() {
            e.b_source = BoundSource::Explicit;
        }
        if self.sigma.is_some() {
            e.g_source = BoundSource::Explicit;
        }
        if self.tau.is_some() || self.h_lag_inf.is_some() {
            e.h_source = BoundSource::Explicit;
        }
        e.bounds.validate()?;
        Ok(e)
    }
}
