//! One command per library operation, kept in a name-keyed registry.

mod analysis;
mod periodic;
mod simulation;

use rwre_core::config::RunConfig;

use crate::error::CliResult;
use crate::output::Output;

/// Run-wide settings that are not part of any computation's inputs.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub workers: usize,
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;

    fn about(&self) -> &'static str;

    /// Fills in every default the command will use, so the stored
    /// configuration replays exactly.
    fn resolve(&self, _cfg: &mut RunConfig) {}

    fn run(&self, cfg: &RunConfig, ctx: &Context) -> CliResult<Output>;
}

pub fn registry() -> Vec<Box<dyn Command>> {
    vec![
        Box::new(analysis::Classify),
        Box::new(analysis::Rate0),
        Box::new(analysis::Saddle),
        Box::new(analysis::Variational),
        Box::new(periodic::BuildStrip),
        Box::new(periodic::PeriodicRate),
        Box::new(periodic::DpReturn),
        Box::new(simulation::Simulate),
        Box::new(simulation::Occupation),
        Box::new(simulation::Scan),
        Box::new(simulation::Dominant),
        Box::new(periodic::Blocks),
        Box::new(simulation::QuenchedExperiment),
        Box::new(simulation::ImportanceCmd),
        Box::new(simulation::Decomposed),
    ]
}

pub fn lookup(name: &str) -> Option<Box<dyn Command>> {
    registry().into_iter().find(|c| c.name() == name)
}

fn default_to<T: Clone>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}
