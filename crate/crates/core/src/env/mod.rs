//! Environments: step distributions, i.i.d. laws, periodic tables and
//! finite realisations.

mod classify;
mod lattice;
mod law;
mod periodic;
mod probvec;
mod sampled;
mod schedule;

pub use classify::{classify_atoms, classify_law, ClassificationReport, Nestling};
pub use lattice::{l1_norm, linf_norm, LatticeBox};
pub use law::EnvironmentLaw;
pub use periodic::{residue, PeriodicEnvironment};
pub use probvec::{drift, mix, opposite, step_axis_sign, step_dot, step_vector, ProbVec, SUM_TOL};
pub use sampled::{sample_environment, site_uniform, SampledEnvironment, SiteSampler};
pub use schedule::TimePeriodicSchedule;

use crate::error::Result;

/// Anything that assigns one of finitely many step distributions to each
/// lattice site. Walk engines only ever see this interface.
pub trait Environment: Send + Sync {
    fn dim(&self) -> usize;

    /// The distinct step distributions the environment uses.
    fn palette(&self) -> &[ProbVec];

    /// Index into [`Environment::palette`] of the distribution at `x`.
    fn class_at(&self, x: &[i64]) -> Result<usize>;

    fn site(&self, x: &[i64]) -> Result<&ProbVec> {
        let c = self.class_at(x)?;
        Ok(&self.palette()[c])
    }

    fn kappa(&self) -> f64;
}
