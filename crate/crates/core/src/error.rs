use thiserror::Error;

use crate::rate::SaddlePoint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A closed form that needs strictly positive entries got a zero.
    #[error("degenerate probability vector: entry {index} is zero")]
    Degenerate { index: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("saddle solver stopped with duality gap {:.3e} above tolerance", best.gap)]
    SaddleNonConvergence { best: Box<SaddlePoint> },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("site {site:?} lies outside the sampled window")]
    OutOfRange { site: Vec<i64> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for every variant that signals an iterative method giving up.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::SaddleNonConvergence { .. } | Error::Lp(_)
        )
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceCap(_) | Error::OutOfRange { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
