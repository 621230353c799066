use nalgebra::{DMatrix, DVector};

use super::mgf::log_mgf_derivatives;
use crate::env::{ProbVec, TimePeriodicSchedule};
use crate::error::Result;
use crate::optimize::{newton_minimize, NewtonOptions, Objective};

/// `theta -> sum_i lambda_i Lambda_i(theta)`.
struct Averaged<'a> {
    sigmas: &'a [ProbVec],
    weights: Vec<f64>,
}

impl Objective for Averaged<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.sigmas.iter().zip(&self.weights).map(|(s, w)| w * super::log_mgf(s, x)).sum()
    }

    fn derivatives(&mut self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = x.len();
        let mut out = (0.0, DVector::zeros(d), DMatrix::zeros(d, d));
        for (s, &w) in self.sigmas.iter().zip(&self.weights) {
            let (v, g, h) = log_mgf_derivatives(s, x);
            out.0 += w * v;
            out.1 += g * w;
            out.2 += h * w;
        }
        out
    }
}

/// Rate at the origin for the walk whose step law cycles through the
/// schedule: `-inf_theta sum_i lambda_i Lambda_i(theta)`.
pub fn time_periodic_rate0(schedule: &TimePeriodicSchedule, tol: f64) -> Result<f64> {
    let (value, _) = averaged_minimizer(schedule.support(), &schedule.frequencies(), tol)?;
    Ok(-value)
}

/// Minimum value and minimiser of `sum_i w_i Lambda_i(theta)`.
pub fn averaged_minimizer(sigmas: &[ProbVec], weights: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    let mut obj = Averaged { sigmas, weights: weights.to_vec() };
    let dim = sigmas[0].dim();
    let mut opts = NewtonOptions::new("averaged log-mgf descent", tol.min(1e-10));
    opts.stall_tol = tol.max(1e-9);
    let m = newton_minimize(&mut obj, &vec![0.0; dim], &opts)?;
    Ok((m.value, m.x))
}
