use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::dp::SlopeFit;
use super::torus::{perron_root, TorusOperator};
use crate::env::{Environment, PeriodicEnvironment};
use crate::error::{Error, Result};
use crate::optimize::{newton_minimize, NewtonOptions, Objective};

/// Precision of each Perron-root evaluation inside the descents.
const INNER_TOL: f64 = 1e-13;
const GRAD_STEP: f64 = 1e-4;
const HESS_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct SpectralPoint {
    pub theta: Vec<f64>,
    pub log_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DpCheck {
    pub n: usize,
    pub probability: f64,
    pub log_probability: f64,
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicRateReport {
    pub period: Vec<usize>,
    /// Period after removing redundant repetitions; the rate depends only
    /// on this.
    pub reduced_period: Vec<usize>,
    pub rate0: f64,
    pub theta_at_min: Vec<f64>,
    pub spectral_curve: Vec<SpectralPoint>,
    pub dp_check: Option<DpCheck>,
    pub iterations: usize,
}

/// `log rho(M_theta)` for the environment.
pub fn log_radius_at(env: &PeriodicEnvironment, theta: &[f64], tol: f64) -> Result<f64> {
    Ok(perron_root(&TorusOperator::new(env, theta)?, tol)?.log_radius)
}

/// `theta -> log rho(M_theta) - <theta, x>`, differentiated numerically.
struct Legendre<'a> {
    build: &'a dyn Fn(&[f64]) -> Result<TorusOperator>,
    x: Vec<f64>,
    failure: Option<Error>,
}

impl Legendre<'_> {
    fn eval(&mut self, theta: &[f64]) -> f64 {
        match (self.build)(theta).and_then(|op| perron_root(&op, INNER_TOL)).map(|p| p.log_radius) {
            Ok(v) => v - theta.iter().zip(&self.x).map(|(a, b)| a * b).sum::<f64>(),
            Err(e) => {
                self.failure.get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn shifted(theta: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
        let mut t = theta.to_vec();
        for &(a, h) in moves {
            t[a] += h;
        }
        t
    }
}

impl Objective for Legendre<'_> {
    fn value(&mut self, theta: &[f64]) -> f64 {
        self.eval(theta)
    }

    fn derivatives(&mut self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let d = theta.len();
        let f0 = self.eval(theta);
        let mut g = DVector::zeros(d);
        let mut h = DMatrix::zeros(d, d);
        for a in 0..d {
            let central = |s: &mut Self, step: f64| {
                (s.eval(&Self::shifted(theta, &[(a, step)])) - s.eval(&Self::shifted(theta, &[(a, -step)])))
                    / (2.0 * step)
            };
            let coarse = central(self, GRAD_STEP);
            let fine = central(self, 0.5 * GRAD_STEP);
            g[a] = (4.0 * fine - coarse) / 3.0;
            let up = self.eval(&Self::shifted(theta, &[(a, HESS_STEP)]));
            let dn = self.eval(&Self::shifted(theta, &[(a, -HESS_STEP)]));
            h[(a, a)] = (up - 2.0 * f0 + dn) / (HESS_STEP * HESS_STEP);
            for b in 0..a {
                let s = HESS_STEP;
                let pp = self.eval(&Self::shifted(theta, &[(a, s), (b, s)]));
                let pm = self.eval(&Self::shifted(theta, &[(a, s), (b, -s)]));
                let mp = self.eval(&Self::shifted(theta, &[(a, -s), (b, s)]));
                let mm = self.eval(&Self::shifted(theta, &[(a, -s), (b, -s)]));
                h[(a, b)] = (pp - pm - mp + mm) / (4.0 * s * s);
                h[(b, a)] = h[(a, b)];
            }
        }
        (f0, g, h)
    }
}

fn minimise_legendre(env: &PeriodicEnvironment, x: &[f64], tol: f64) -> Result<(f64, Vec<f64>, usize)> {
    let reduced = env.reduced();
    let start = super::dp::balancing_theta(&reduced)?;
    minimise_operator_legendre(&|th: &[f64]| TorusOperator::new(&reduced, th), &start, x, tol)
}

/// Minimises `log rho(M_theta) - <theta, x>` over `theta` for operators
/// produced by `build`, starting from `start`. Returns the minimum value,
/// the minimiser and the Newton iterations used.
pub fn minimise_operator_legendre(
    build: &dyn Fn(&[f64]) -> Result<TorusOperator>,
    start: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<(f64, Vec<f64>, usize)> {
    let mut obj = Legendre { build, x: x.to_vec(), failure: None };
    let mut opts = NewtonOptions::new("periodic rate descent", 1e-9);
    opts.stall_tol = tol.max(1e-7);
    opts.max_iter = 100;
    let result = newton_minimize(&mut obj, start, &opts);
    if let Some(e) = obj.failure {
        return Err(e);
    }
    let m = result?;
    Ok((m.value, m.x, m.iterations))
}

/// `I(0) = -inf_theta log rho(M_theta)` for the periodic environment, with
/// a sampled curve of `log rho` along each axis through the minimiser.
pub fn periodic_rate0(env: &PeriodicEnvironment, tol: f64) -> Result<PeriodicRateReport> {
    let d = env.dim();
    let (value, theta, iterations) = minimise_legendre(env, &vec![0.0; d], tol)?;
    let reduced = env.reduced();
    let mut spectral_curve = Vec::new();
    for a in 0..d {
        for k in -4..=4 {
            let mut t = theta.clone();
            t[a] += 0.25 * k as f64;
            spectral_curve.push(SpectralPoint { log_radius: log_radius_at(&reduced, &t, INNER_TOL)?, theta: t });
        }
    }
    Ok(PeriodicRateReport {
        period: env.period().to_vec(),
        reduced_period: reduced.period().to_vec(),
        rate0: (-value).max(0.0),
        theta_at_min: theta,
        spectral_curve,
        dp_check: None,
        iterations,
    })
}

/// `sup_theta (<theta, x> - log rho(M_theta))`; requires `|x|_1 <= 1`.
pub fn periodic_rate(env: &PeriodicEnvironment, x: &[f64], tol: f64) -> Result<f64> {
    if x.len() != env.dim() {
        return Err(Error::invalid("x has the wrong dimension"));
    }
    if x.iter().map(|v| v.abs()).sum::<f64>() > 1.0 + 1e-12 {
        return Err(Error::invalid("the rate is infinite outside the unit l1 ball"));
    }
    let (value, _, _) = minimise_legendre(env, x, tol)?;
    Ok(-value)
}

/// Midpoint convexity of `log rho` along the segment `[a, b]`, sampled at
/// `k` interior points. Returns the largest violation (negative is fine).
pub fn convexity_defect(env: &PeriodicEnvironment, a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    let at = |s: f64| -> Result<f64> {
        let t: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
        log_radius_at(env, &t, INNER_TOL)
    };
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=k {
        let s = i as f64 / (k + 1) as f64;
        let h = 0.5 / (k + 1) as f64;
        worst = worst.max(at(s)? - 0.5 * (at(s - h)? + at(s + h)?));
    }
    Ok(worst)
}
