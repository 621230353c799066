use serde::Serialize;

use rwre_core::config::RunConfig;
use rwre_core::env::{Environment, PeriodicEnvironment, SiteSampler};
use rwre_core::periodic::{default_dp_cap, exact_return_probability, periodic_rate0};
use rwre_core::rate::{variational_i0, DEFAULT_TOL};
use rwre_core::simulate::{
    decomposed_rwpe_run, dominant_event_bound, first_hit_n, occupation_check, quenched_rate_experiment, return_estimator,
    run_walk, scan_environment, DominantOutcome, ScanMode, DEFAULT_SITE_CAP,
};
use rwre_core::strip::{build_strip_environment, optimal_strip_pipeline, PipelineOptions, StripBuildReport};

use super::{default_to, Command, Context};
use crate::error::{CliError, CliResult};
use crate::output::{float, float_opt, Output};

/// The walk's environment: the periodic one if given, else the law
/// realised lazily under `seed`.
fn walk_environment(cfg: &RunConfig, seed: u64) -> CliResult<Box<dyn Environment>> {
    match (&cfg.environment, &cfg.law) {
        (Some(env), _) => Ok(Box::new(env.clone())),
        (None, Some(law)) => Ok(Box::new(SiteSampler::new(law.clone(), seed))),
        _ => Err(CliError::Config("missing field `environment` (or `law`)".into())),
    }
}

/// Tilted strips with target frequencies: from `strip` + `targets`, or
/// the optimal construction for `law`.
fn tilted_strips(cfg: &RunConfig) -> CliResult<StripBuildReport> {
    if let Some(spec) = &cfg.strip {
        let mut rep = build_strip_environment(spec)?;
        rep.targets = Some(cfg.targets.clone().or(cfg.t_star.clone()).ok_or_else(|| {
            CliError::Config("missing field `targets` (strip frequencies)".into())
        })?);
        return Ok(rep);
    }
    let opts = cfg.pipeline.clone().unwrap_or_default();
    Ok(optimal_strip_pipeline(cfg.law()?, &opts)?.tilted_strip)
}

fn resolve_strips(cfg: &mut RunConfig) {
    if cfg.strip.is_none() {
        default_to(&mut cfg.pipeline, PipelineOptions::default());
    }
}

pub struct Simulate;

impl Command for Simulate {
    fn name(&self) -> &'static str {
        "simulate"
    }

    fn about(&self) -> &'static str {
        "quenched walks, one per seed"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        if let Some(d) = cfg.environment.as_ref().map(|e| e.dim()).or(cfg.law.as_ref().map(|l| l.dim())) {
            default_to(&mut cfg.start, vec![0; d]);
        }
        default_to(&mut cfg.seed, 0);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let n = cfg.n()?;
        let start = cfg.start.clone().ok_or_else(|| CliError::Config("missing field `start`".into()))?;
        let mut runs = Vec::new();
        for seed in cfg.seed_list() {
            runs.push(run_walk(walk_environment(cfg, seed)?.as_ref(), &start, n, seed)?);
        }
        let rows = runs
            .iter()
            .map(|r| {
                let end: Vec<String> = r.endpoint.iter().map(i64::to_string).collect();
                vec![r.seed.to_string(), r.steps.to_string(), end.join(" "), r.max_displacement.to_string()]
            })
            .collect();
        Output::default()
            .json(self.name(), &runs)?
            .csv(self.name(), &["seed", "N", "endpoint", "max_displacement"], rows)
    }
}

pub struct Occupation;

#[derive(Serialize)]
struct OccupationOut {
    runs: Vec<rwre_core::simulate::OccupationReport>,
    passed: usize,
}

impl Command for Occupation {
    fn name(&self) -> &'static str {
        "occupation"
    }

    fn about(&self) -> &'static str {
        "time fraction spent in each strip against the target frequencies"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        resolve_strips(cfg);
        default_to(&mut cfg.epsilon, 0.05);
        default_to(&mut cfg.seed, 0);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let strips = tilted_strips(cfg)?;
        let n = cfg.n()?;
        let runs = cfg
            .seed_list()
            .into_iter()
            .map(|s| occupation_check(&strips, n, s, cfg.epsilon()?))
            .collect::<Result<Vec<_>, _>>()?;
        let passed = runs.iter().filter(|r| r.pass).count();
        Output::default().json(self.name(), &OccupationOut { runs, passed })
    }
}

pub struct Decomposed;

impl Command for Decomposed {
    fn name(&self) -> &'static str {
        "decomposed"
    }

    fn about(&self) -> &'static str {
        "composed per-strip walks and their law-of-large-numbers events"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        resolve_strips(cfg);
        default_to(&mut cfg.epsilon, 0.1);
        default_to(&mut cfg.runs, 100);
        default_to(&mut cfg.seed, 0);
    }

    fn run(&self, cfg: &RunConfig, ctx: &Context) -> CliResult<Output> {
        let strips = tilted_strips(cfg)?;
        let t = strips.targets.clone().unwrap_or_default();
        let rep = decomposed_rwpe_run(
            &strips.spec,
            &t,
            cfg.n()?,
            cfg.epsilon()?,
            cfg.runs.unwrap_or(100),
            cfg.seed.unwrap_or(0),
            ctx.workers,
        )?;
        Output::default().json(self.name(), &rep)
    }
}

pub struct ImportanceCmd;

impl Command for ImportanceCmd {
    fn name(&self) -> &'static str {
        "importance"
    }

    fn about(&self) -> &'static str {
        "return probabilities by tilted importance sampling (or another estimator)"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.estimator, "importance".to_string());
        default_to(&mut cfg.samples, 100_000);
        default_to(&mut cfg.seed, 0);
    }

    fn run(&self, cfg: &RunConfig, ctx: &Context) -> CliResult<Output> {
        let env = cfg.environment()?;
        let name = cfg.estimator.as_deref().unwrap_or("importance");
        let est = return_estimator(name).ok_or_else(|| CliError::Config(format!("unknown estimator `{name}`")))?;
        let cap = cfg.cap.unwrap_or_else(|| default_dp_cap(env.dim()));
        let mut estimates = Vec::new();
        let mut rows = Vec::new();
        for n in cfg.grid()? {
            let e = est.estimate(env, n, cfg.samples.unwrap_or(100_000), cfg.seed.unwrap_or(0), ctx.workers)?;
            let reference = (n <= cap).then(|| exact_return_probability(env, n)).transpose()?;
            rows.push(vec![n.to_string(), float(e.estimate), float(e.stderr), float_opt(reference)]);
            estimates.push(e);
        }
        Output::default()
            .json(self.name(), &estimates)?
            .csv(self.name(), &["N", "estimate", "stderr", "reference"], rows)
    }
}

pub struct Scan;

#[derive(Serialize)]
struct FirstHits {
    epsilon: f64,
    delta: f64,
    grid: Vec<usize>,
    first_hit: Vec<(u64, Option<usize>)>,
}

impl Command for Scan {
    fn name(&self) -> &'static str {
        "scan"
    }

    fn about(&self) -> &'static str {
        "balls of the sampled environment that match a periodic target"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.mode, ScanMode::Exhaustive);
        default_to(&mut cfg.cap, DEFAULT_SITE_CAP);
        default_to(&mut cfg.seed, 0);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let law = cfg.law()?;
        let target = cfg.target()?;
        let (eps, delta) = (cfg.epsilon()?, cfg.delta()?);
        if let Some(grid) = &cfg.n_grid {
            let first_hit = cfg
                .seed_list()
                .into_iter()
                .map(|s| Ok((s, first_hit_n(law, target, eps, delta, grid, s)?)))
                .collect::<CliResult<Vec<_>>>()?;
            return Output::default().json(self.name(), &FirstHits { epsilon: eps, delta, grid: grid.clone(), first_hit });
        }
        let seed = cfg.seed.unwrap_or(0);
        let omega = SiteSampler::new(law.clone(), seed);
        let mode = cfg.mode.unwrap_or(ScanMode::Exhaustive);
        let rep = scan_environment(&omega, target, eps, delta, cfg.n()?, mode, cfg.cap.unwrap_or(DEFAULT_SITE_CAP))?;
        Output::default().json(self.name(), &rep)
    }
}

pub struct Dominant;

impl Command for Dominant {
    fn name(&self) -> &'static str {
        "dominant"
    }

    fn about(&self) -> &'static str {
        "dominant-event lower bound on the quenched return probability"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.tol, DEFAULT_TOL);
        if cfg.law.is_some() {
            default_to(&mut cfg.seed, 0);
        }
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let target: &PeriodicEnvironment = cfg.target()?;
        let (eps, delta) = (cfg.epsilon()?, cfg.delta()?);
        let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
        // Without a law the environment is the target itself.
        let (omega, i0): (Box<dyn Environment>, f64) = match &cfg.law {
            Some(law) => (Box::new(SiteSampler::new(law.clone(), cfg.seed.unwrap_or(0))), variational_i0(law, tol)?.i0),
            None => (Box::new(target.clone()), periodic_rate0(target, tol)?.rate0),
        };
        let mut outcomes = Vec::new();
        let mut rows = Vec::new();
        for n in cfg.grid()? {
            let o = dominant_event_bound(omega.as_ref(), target, eps, delta, n, Some(i0))?;
            rows.push(match &o {
                DominantOutcome::Realized(r) => {
                    vec![n.to_string(), float(r.total), float(r.per_step), float_opt(r.reference)]
                }
                DominantOutcome::NotRealized { .. } => vec![n.to_string(), String::new(), String::new(), float(-i0 * n as f64)],
            });
            outcomes.push(o);
        }
        Output::default()
            .json(self.name(), &outcomes)?
            .csv(self.name(), &["N", "total", "per_step", "reference"], rows)
    }
}

pub struct QuenchedExperiment;

impl Command for QuenchedExperiment {
    fn name(&self) -> &'static str {
        "quenched-experiment"
    }

    fn about(&self) -> &'static str {
        "quenched return-rate series over sampled environments"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.samples, 10_000);
        default_to(&mut cfg.tol, DEFAULT_TOL);
        if cfg.seeds.is_none() {
            default_to(&mut cfg.seed, 0);
        }
    }

    fn run(&self, cfg: &RunConfig, ctx: &Context) -> CliResult<Output> {
        let rep = quenched_rate_experiment(
            cfg.law()?,
            &cfg.grid()?,
            &cfg.seed_list(),
            cfg.samples.unwrap_or(10_000),
            ctx.workers,
            cfg.tol.unwrap_or(DEFAULT_TOL),
        )?;
        let rows = rep
            .rows
            .iter()
            .map(|r| {
                vec![r.seed.to_string(), r.n.to_string(), float(r.estimate), float(r.stderr), float(r.rate), float(r.reference)]
            })
            .collect();
        Output::default()
            .json(self.name(), &rep)?
            .csv(self.name(), &["seed", "N", "estimate", "stderr", "rate", "reference"], rows)
    }
}
