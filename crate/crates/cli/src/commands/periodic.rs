use serde::Serialize;

use rwre_core::config::RunConfig;
use rwre_core::periodic::{default_dp_cap, fit_rate, periodic_rate, periodic_rate0, return_probability_series, DpOptions, SlopeFit};
use rwre_core::simulate::block_return_bound;
use rwre_core::strip::{build_strip_environment, optimal_strip_pipeline, PipelineOptions};

use super::{default_to, Command, Context};
use crate::error::CliResult;
use crate::output::{float, Output};

const PERIODIC_TOL: f64 = 1e-10;

pub struct BuildStrip;

impl Command for BuildStrip {
    fn name(&self) -> &'static str {
        "build-strip"
    }

    fn about(&self) -> &'static str {
        "strip-periodic environment from an explicit spec, or the optimal one for a law"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        if cfg.strip.is_none() {
            default_to(&mut cfg.pipeline, PipelineOptions::default());
        }
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        if let Some(spec) = &cfg.strip {
            let mut rep = build_strip_environment(spec)?;
            rep.targets = cfg.targets.clone();
            return Output::default()
                .json(self.name(), &rep)?
                .json("environment", &rep.environment)?
                .json("strip", &rep.spec);
        }
        let opts = cfg.pipeline.clone().unwrap_or_default();
        let rep = optimal_strip_pipeline(cfg.law()?, &opts)?;
        let mut out = Output::default()
            .json(self.name(), &rep)?
            .json("environment", &rep.strip.environment)?
            .json("strip", &rep.strip.spec)?
            .json("tilted_environment", &rep.tilted_strip.environment)?
            .json("tilted_strip", &rep.tilted_strip.spec)?;
        if !rep.certified {
            out.uncertified = Some(format!(
                "strip rate is {:.3e} from I(0) at the largest scale tried (M = {})",
                rep.gap, rep.m
            ));
        }
        Ok(out)
    }
}

pub struct PeriodicRate;

#[derive(Serialize)]
struct PeriodicRateOut<'a> {
    #[serde(flatten)]
    report: &'a rwre_core::periodic::PeriodicRateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_at_x: Option<f64>,
}

impl Command for PeriodicRate {
    fn name(&self) -> &'static str {
        "periodic-rate"
    }

    fn about(&self) -> &'static str {
        "Perron-root rate function of a periodic environment"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.tol, PERIODIC_TOL);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let env = cfg.environment()?;
        let tol = cfg.tol.unwrap_or(PERIODIC_TOL);
        let report = periodic_rate0(env, tol)?;
        let rate_at_x = cfg.x.as_ref().map(|x| periodic_rate(env, x, tol)).transpose()?;
        Output::default().json(self.name(), &PeriodicRateOut { report: &report, x: cfg.x.clone(), rate_at_x })
    }
}

pub struct DpReturn;

#[derive(Serialize)]
struct DpOut {
    points: Vec<rwre_core::periodic::ReturnProbability>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<SlopeFit>,
}

impl Command for DpReturn {
    fn name(&self) -> &'static str {
        "dp-return"
    }

    fn about(&self) -> &'static str {
        "exact return probabilities by dynamic programming"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        if let Some(env) = &cfg.environment {
            let d = rwre_core::env::Environment::dim(env);
            default_to(&mut cfg.cap, default_dp_cap(d));
        }
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let env = cfg.environment()?;
        let opts = DpOptions { cap: cfg.cap, balance: None, start: cfg.start.clone() };
        let points = return_probability_series(env, &cfg.grid()?, &opts)?;
        let rows = points
            .iter()
            .map(|p| vec![p.n.to_string(), float(p.probability), float(p.log_probability)])
            .collect();
        let fit = fit_rate(&points).ok();
        Output::default()
            .json(self.name(), &DpOut { points: points.clone(), fit })?
            .csv(self.name(), &["N", "probability", "log_probability"], rows)
    }
}

pub struct Blocks;

impl Command for Blocks {
    fn name(&self) -> &'static str {
        "blocks"
    }

    fn about(&self) -> &'static str {
        "confined block-return bound and local-limit exponent"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.tol, PERIODIC_TOL);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let rep = block_return_bound(cfg.environment()?, cfg.delta()?, cfg.n()?, cfg.tol.unwrap_or(PERIODIC_TOL))?;
        Output::default().json(self.name(), &rep)
    }
}
