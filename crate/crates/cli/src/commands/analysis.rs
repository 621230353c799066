use serde::Serialize;

use rwre_core::config::RunConfig;
use rwre_core::env::{classify_law, ClassificationReport, ProbVec};
use rwre_core::rate::{minimizer_theta, rate_method, rate_methods, solve_saddle, variational_i0, DEFAULT_TOL};

use super::{default_to, Command, Context};
use crate::error::{CliError, CliResult};
use crate::output::Output;

pub struct Classify;

#[derive(Serialize)]
struct ClassifyOut {
    #[serde(flatten)]
    report: ClassificationReport,
    drifts: Vec<Vec<f64>>,
}

impl Command for Classify {
    fn name(&self) -> &'static str {
        "classify"
    }

    fn about(&self) -> &'static str {
        "nestling class of a law from its drift hull"
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let law = cfg.law()?;
        let out = ClassifyOut { report: classify_law(law)?, drifts: law.atoms().iter().map(ProbVec::drift).collect() };
        Output::default().json(self.name(), &out)
    }
}

pub struct Rate0;

#[derive(Serialize)]
struct MethodValue {
    method: &'static str,
    i0: f64,
}

#[derive(Serialize)]
struct Rate0Out {
    sigma: ProbVec,
    drift: Vec<f64>,
    theta_min: Vec<f64>,
    rates: Vec<MethodValue>,
}

impl Command for Rate0 {
    fn name(&self) -> &'static str {
        "rate0"
    }

    fn about(&self) -> &'static str {
        "rate at the origin of one step distribution"
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let sigma = cfg.sigma()?;
        let methods = match &cfg.method {
            Some(m) => vec![rate_method(m).ok_or_else(|| CliError::Config(format!("unknown method `{m}`")))?],
            None => rate_methods(),
        };
        let rates = methods
            .iter()
            .map(|m| Ok(MethodValue { method: m.name(), i0: m.rate(sigma)? }))
            .collect::<CliResult<Vec<_>>>()?;
        let out = Rate0Out { sigma: sigma.clone(), drift: sigma.drift(), theta_min: minimizer_theta(sigma)?, rates };
        Output::default().json(self.name(), &out)
    }
}

pub struct Saddle;

impl Command for Saddle {
    fn name(&self) -> &'static str {
        "saddle"
    }

    fn about(&self) -> &'static str {
        "certified saddle point of the mixture log-mgf"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.tol, DEFAULT_TOL);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let sp = solve_saddle(&cfg.sigmas()?, cfg.tol.unwrap_or(DEFAULT_TOL))?;
        Output::default().json(self.name(), &sp)
    }
}

pub struct Variational;

impl Command for Variational {
    fn name(&self) -> &'static str {
        "variational"
    }

    fn about(&self) -> &'static str {
        "I(0) of a law, its optimal mixture and tilt"
    }

    fn resolve(&self, cfg: &mut RunConfig) {
        default_to(&mut cfg.tol, DEFAULT_TOL);
    }

    fn run(&self, cfg: &RunConfig, _: &Context) -> CliResult<Output> {
        let rep = variational_i0(cfg.law()?, cfg.tol.unwrap_or(DEFAULT_TOL))?;
        Output::default().json(self.name(), &rep)
    }
}
