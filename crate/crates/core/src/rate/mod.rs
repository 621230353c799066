//! Rates at the origin: single-site closed form, the convex-concave
//! saddle over mixtures, and the variational formula for i.i.d. laws.

mod methods;
mod mgf;
mod saddle;
mod schedule;
mod variational;

pub use methods::{rate_method, rate_methods, ClosedForm, NumericDescent, RateAtZero};
pub use mgf::{
    log_mgf, log_mgf_derivatives, minimizer_theta, rate_at_zero_closed, rate_at_zero_numeric,
    rate_at_zero_numeric_report, tilt, NumericRate,
};
pub use saddle::{r1, r2, saddle_objective, solve_saddle, SaddlePoint, DEFAULT_TOL};
pub use schedule::{averaged_minimizer, time_periodic_rate0};
pub use variational::{pstar_boundary_check, variational_i0, BoundaryCheck, RateReport};
