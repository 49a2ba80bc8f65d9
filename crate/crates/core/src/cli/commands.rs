use std::path::PathBuf;

use serde::Serialize;

use super::config::{BoundOverrides, Config, Format, Kind, Problem};
use super::report::{self, path_for};
use super::{CliError, Common, EXIT_NOT_CERTIFIED, EXIT_OK};
use crate::criteria::{check_all, CheckOptions, CriterionId, Skipped, Verdict, WindowOptions};
use crate::funcspec::{extract_bounds, Bindings, ExtractedBounds};
use crate::logistic::{check_local_stability, integrate_logistic, linearize};
use crate::simulator::{
    estimate_decay, fundamental as fundamental_fn, integrate, DecayEstimate, DecayOptions, DecayVerdict, NDDEProblem,
    Status, Trajectory,
};
use crate::sweep::{find_threshold, sweep_grid, SweepSpec, ThresholdResult};

struct Context {
    cfg: Config,
    env: Bindings,
    out_dir: PathBuf,
    format: Format,
}

impl Context {
    fn load(c: &Common) -> Result<Self, CliError> {
        let cfg = Config::load(&c.config)?;
        let env = cfg.bindings();
        let out_dir = c
            .out_dir
            .clone()
            .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let format = c.format.or(cfg.output.format).unwrap_or_default();
        Ok(Context {
            cfg,
            env,
            out_dir,
            format,
        })
    }

    fn preamble(&self, command: &str) -> Vec<(String, String)> {
        let mut p = vec![("command".to_string(), command.to_string())];
        for (k, v) in &self.env {
            p.push((format!("param.{k}"), v.to_string()));
        }
        p
    }
}

#[derive(Debug, Clone, Serialize)]
struct Tolerances {
    sampling_horizon: (f64, f64),
    n_samples: usize,
    window_step: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CheckOutput {
    kind: Kind,
    bounds: ExtractedBounds,
    overrides: BoundOverrides,
    tolerances: Tolerances,
    verdicts: Vec<Verdict>,
    skipped: Vec<Skipped>,
    /// Verdicts computed on a constant-delay companion; not counted.
    companion: Vec<CriterionId>,
    certified: bool,
    /// Logistic only: also counting the printed logistic inequalities.
    #[serde(skip_serializing_if = "Option::is_none")]
    certified_as_printed: Option<bool>,
}

/// Bound extraction with config overrides applied.
fn resolve_bounds(
    cfg: &Config,
    env: &Bindings,
    p: &NDDEProblem,
    horizon: (f64, f64),
) -> Result<(ExtractedBounds, BoundOverrides), CliError> {
    let overrides = cfg.bound_overrides(env)?;
    if let Some(all) = overrides.complete() {
        return Ok((all?, overrides));
    }
    let extracted = extract_bounds(p, horizon, cfg.n_samples())?;
    Ok((overrides.apply(extracted)?, overrides))
}

fn run_check(cfg: &Config, env: &Bindings, horizon_end: Option<f64>) -> Result<CheckOutput, CliError> {
    let problem = cfg.problem(env)?;
    let t0 = problem.t0();
    let mut horizon = cfg.sampling_horizon(env, t0, problem.max_lag())?;
    if let Some(end) = horizon_end {
        horizon.1 = end;
    }
    let window = WindowOptions {
        start: horizon.0,
        horizon: horizon.1 - horizon.0,
        ..WindowOptions::default()
    };
    let tolerances = Tolerances {
        sampling_horizon: horizon,
        n_samples: cfg.n_samples(),
        window_step: window.step,
    };
    let linear = match &problem {
        Problem::Neutral(p) => p.clone(),
        Problem::Logistic(p) => linearize(p),
    };
    let (bounds, overrides) = resolve_bounds(cfg, env, &linear, horizon)?;
    let opts = CheckOptions {
        horizon: Some(horizon),
        n_samples: cfg.n_samples(),
        window,
        bounds_override: Some(bounds.clone()),
    };
    Ok(match &problem {
        Problem::Neutral(p) => {
            let r = check_all(p, &opts)?;
            CheckOutput {
                kind: Kind::Neutral,
                bounds,
                overrides,
                tolerances,
                verdicts: r.verdicts,
                skipped: r.skipped,
                companion: r.companion,
                certified: r.certified,
                certified_as_printed: None,
            }
        }
        Problem::Logistic(p) => {
            let r = check_local_stability(p, &opts)?;
            CheckOutput {
                kind: Kind::Logistic,
                bounds,
                overrides,
                tolerances,
                verdicts: r.verdicts,
                skipped: r.skipped,
                companion: r.linearized.companion,
                certified: r.certified,
                certified_as_printed: Some(r.certified_as_printed),
            }
        }
    })
}

fn bounds_preamble(p: &mut Vec<(String, String)>, out: &CheckOutput) {
    let b = &out.bounds.bounds;
    for (k, v) in [
        ("a0", b.a0),
        ("A0", b.A0),
        ("b0", b.b0),
        ("B0", b.B0),
        ("tau", b.tau),
        ("sigma", b.sigma),
        ("h_lag_inf", b.h_lag_inf),
    ] {
        p.push((format!("bounds.{k}"), v.to_string()));
    }
    for (k, s) in [
        ("a_source", &out.bounds.a_source),
        ("b_source", &out.bounds.b_source),
        ("g_source", &out.bounds.g_source),
        ("h_source", &out.bounds.h_source),
    ] {
        p.push((format!("bounds.{k}"), serde_json::to_string(s).unwrap_or_default()));
    }
    let t = &out.tolerances;
    p.push((
        "sampling_horizon".into(),
        format!("[{}, {}]", t.sampling_horizon.0, t.sampling_horizon.1),
    ));
    p.push(("n_samples".into(), t.n_samples.to_string()));
    p.push(("window_step".into(), t.window_step.to_string()));
    p.push(("certified".into(), out.certified.to_string()));
    if let Some(c) = out.certified_as_printed {
        p.push(("certified_as_printed".into(), c.to_string()));
    }
}

pub fn check(c: &Common) -> Result<i32, CliError> {
    let ctx = Context::load(c)?;
    let out = run_check(&ctx.cfg, &ctx.env, c.horizon)?;

    print!("{}", report::verdict_table(&out.verdicts));
    for s in &out.skipped {
        println!("skipped {}: {}", s.criterion, s.reason);
    }
    println!("certified: {}", out.certified);

    report::ensure_dir(&ctx.out_dir)?;
    let path = path_for(&ctx.out_dir, "check", ctx.format);
    match ctx.format {
        Format::Json => report::write_json(&path, &out)?,
        Format::Csv => {
            let mut pre = ctx.preamble("check");
            bounds_preamble(&mut pre, &out);
            report::write_verdicts_csv(&path, &pre, &out.verdicts)?;
        }
    }
    Ok(if out.certified { EXIT_OK } else { EXIT_NOT_CERTIFIED })
}

struct Grid {
    t_end: f64,
    dt: f64,
}

fn grid(c: &Common, ctx: &Context, problem: &Problem, start: f64) -> Result<Grid, CliError> {
    let sim = &ctx.cfg.simulate;
    let dt = match (c.dt, &sim.dt) {
        (Some(dt), _) => dt,
        (None, Some(s)) => s.resolve(&ctx.env)?,
        (None, None) => problem.min_positive_lag().map_or(0.01, |l| (l / 4.0).min(0.01)),
    };
    let t_end = match (c.horizon, &sim.T) {
        (Some(t), _) => t,
        (None, Some(s)) => s.resolve(&ctx.env)?,
        (None, None) => start + 100.0 * problem.max_lag().max(1.0),
    };
    Ok(Grid { t_end, dt })
}

#[derive(Debug, Clone, Serialize)]
struct SimulateOutput {
    kind: Kind,
    status: Status,
    t0: f64,
    t_end: f64,
    dt: f64,
    final_x: f64,
    /// Logistic runs are measured as deviation from `K`.
    #[serde(skip_serializing_if = "Option::is_none")]
    final_relative_deviation: Option<f64>,
    decay: Option<DecayEstimate>,
    decay_options: DecayOptions,
}

fn decay_of(tr: &Trajectory, opts: &DecayOptions) -> Result<Option<DecayEstimate>, CliError> {
    if tr.is_completed() {
        Ok(Some(estimate_decay(tr, opts)?))
    } else {
        Ok(None)
    }
}

fn write_run(ctx: &Context, stem: &str, tr: &Trajectory, out: &SimulateOutput) -> Result<(), CliError> {
    report::ensure_dir(&ctx.out_dir)?;
    report::write_trajectory(&ctx.out_dir.join(format!("{stem}_trajectory.csv")), tr)?;
    let path = path_for(&ctx.out_dir, stem, ctx.format);
    match ctx.format {
        Format::Json => report::write_json(&path, out),
        Format::Csv => {
            let mut pre = ctx.preamble(stem);
            let o = &out.decay_options;
            pre.push(("dt".into(), out.dt.to_string()));
            pre.push(("tail_fraction".into(), o.tail_fraction.to_string()));
            pre.push(("drop_ratio".into(), o.drop_ratio.to_string()));
            pre.push(("blocks".into(), o.blocks.to_string()));
            let d = out.decay.as_ref();
            let num = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            let status = serde_json::to_value(out.status)
                .ok()
                .and_then(|v| v.get("status").and_then(|s| s.as_str()).map(str::to_string))
                .unwrap_or_default();
            let fields = [
                ("status", status),
                ("t_end", out.t_end.to_string()),
                ("final_x", out.final_x.to_string()),
                ("final_relative_deviation", num(out.final_relative_deviation)),
                ("gamma_est", num(d.map(|d| d.gamma_est))),
                ("M_est", num(d.map(|d| d.m_est))),
                ("fit_residual", num(d.map(|d| d.fit_residual))),
                (
                    "verdict",
                    d.map_or(String::new(), |d| {
                        serde_json::to_value(d.verdict)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default()
                    }),
                ),
            ];
            report::write_record_csv(&path, &pre, &fields)
        }
    }
}

fn print_run(out: &SimulateOutput) {
    println!("status: {:?}", out.status);
    println!("t_end: {}  final x: {}", out.t_end, out.final_x);
    if let Some(dev) = out.final_relative_deviation {
        println!("final relative deviation from K: {dev:e}");
    }
    match &out.decay {
        Some(d) => println!(
            "decay: {:?}  gamma_est = {}  M_est = {}  residual = {}",
            d.verdict, d.gamma_est, d.m_est, d.fit_residual
        ),
        None => println!("decay: not estimated"),
    }
}

fn exit_for(out: &SimulateOutput) -> i32 {
    match (&out.status, &out.decay) {
        (Status::Completed, Some(d)) if d.verdict == DecayVerdict::Decaying => EXIT_OK,
        _ => EXIT_NOT_CERTIFIED,
    }
}

pub fn simulate(c: &Common) -> Result<i32, CliError> {
    let ctx = Context::load(c)?;
    let problem = ctx.cfg.problem(&ctx.env)?;
    let Grid { t_end, dt } = grid(c, &ctx, &problem, problem.t0())?;
    let opts = ctx.cfg.decay_options();
    let (tr, deviation, kind) = match &problem {
        Problem::Neutral(p) => (integrate(p, t_end, dt)?, None, Kind::Neutral),
        Problem::Logistic(p) => {
            let tr = integrate_logistic(p, t_end, dt)?;
            let mut dev = tr.clone();
            dev.x.iter_mut().for_each(|x| *x -= p.K);
            (tr, Some((dev, p.K)), Kind::Logistic)
        }
    };
    let final_x = *tr.x.last().expect("non-empty trajectory");
    let (decay, final_relative_deviation) = match &deviation {
        None => (decay_of(&tr, &opts)?, None),
        Some((dev, k)) => (decay_of(dev, &opts)?, Some((final_x - k).abs() / k)),
    };
    let out = SimulateOutput {
        kind,
        status: tr.status,
        t0: tr.t0,
        t_end: tr.t_end(),
        dt,
        final_x,
        final_relative_deviation,
        decay,
        decay_options: opts,
    };
    print_run(&out);
    write_run(&ctx, "simulate", &tr, &out)?;
    Ok(exit_for(&out))
}

pub fn fundamental(c: &Common, s: Option<f64>) -> Result<i32, CliError> {
    let ctx = Context::load(c)?;
    let problem = ctx.cfg.problem(&ctx.env)?;
    let linear = match &problem {
        Problem::Neutral(p) => p.clone(),
        Problem::Logistic(p) => linearize(p),
    };
    let s = match (s, &ctx.cfg.simulate.s) {
        (Some(s), _) => s,
        (None, Some(v)) => v.resolve(&ctx.env)?,
        (None, None) => linear.t0,
    };
    let Grid { t_end, dt } = grid(c, &ctx, &problem, s)?;
    let tr = fundamental_fn(&linear, s, t_end, dt)?;
    let opts = ctx.cfg.decay_options();
    let out = SimulateOutput {
        kind: ctx.cfg.equation.kind,
        status: tr.status,
        t0: tr.t0,
        t_end: tr.t_end(),
        dt,
        final_x: *tr.x.last().expect("non-empty trajectory"),
        final_relative_deviation: None,
        decay: decay_of(&tr, &opts)?,
        decay_options: opts,
    };
    print_run(&out);
    write_run(&ctx, "fundamental", &tr, &out)?;
    Ok(exit_for(&out))
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary {
    spec: SweepSpec,
    thresholds: Vec<ThresholdResult>,
}

pub fn sweep(c: &Common) -> Result<i32, CliError> {
    let ctx = Context::load(c)?;
    let section = ctx
        .cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let spec = SweepSpec {
        parameter: section.parameter.clone(),
        range: (section.range[0].resolve(&ctx.env)?, section.range[1].resolve(&ctx.env)?),
        criteria: ctx.cfg.sweep_criteria()?,
        tol: section.tol.unwrap_or(super::config::DEFAULT_SWEEP_TOL),
        scan_points: section.scan_points.unwrap_or(super::config::DEFAULT_SCAN_POINTS),
    };
    spec.validate()?;
    let template = |value: f64| -> Result<Vec<Verdict>, CliError> {
        let mut env = ctx.env.clone();
        env.insert(spec.parameter.clone(), value);
        Ok(run_check(&ctx.cfg, &env, c.horizon)?.verdicts)
    };
    let thresholds = find_threshold(&spec, &template)?;
    let table = sweep_grid(&spec, &template)?;

    print!("{}", report::threshold_summary(&spec.parameter, &thresholds));
    report::ensure_dir(&ctx.out_dir)?;
    let summary = SweepSummary { spec, thresholds };
    report::write_json(&ctx.out_dir.join("thresholds.json"), &summary)?;
    let path = path_for(&ctx.out_dir, "sweep_grid", ctx.format);
    match ctx.format {
        Format::Json => report::write_json(&path, &table)?,
        Format::Csv => {
            let mut pre = ctx.preamble("sweep");
            let s = &summary.spec;
            pre.push(("parameter".into(), s.parameter.clone()));
            pre.push(("range".into(), format!("[{}, {}]", s.range.0, s.range.1)));
            pre.push(("tol".into(), s.tol.to_string()));
            pre.push(("scan_points".into(), s.scan_points.to_string()));
            report::write_grid_csv(&path, &pre, &table)?;
        }
    }
    Ok(EXIT_OK)
}
