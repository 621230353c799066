//! Walks in periodic environments: the tilted operator on the period
//! torus, its Perron root and Legendre transform, the folded stationary
//! law, and exact return probabilities.

mod dp;
mod rate;
mod stationary;
mod torus;

pub use dp::{
    balancing_theta, default_dp_cap, exact_return_probability, fit_rate, return_probability_series, DpOptions,
    ReturnProbability, SlopeFit,
};
pub use rate::{convexity_defect, log_radius_at, minimise_operator_legendre, periodic_rate, periodic_rate0, DpCheck, PeriodicRateReport, SpectralPoint};
pub use stationary::invariant_measure;
pub use torus::{perron_root, spectral_log_radius, PerronRoot, TorusOperator};
