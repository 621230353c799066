use rayon::prelude::*;
use serde::Serialize;

use super::rng::{stream, with_pool, BLOCK};
use super::walk::{apply_step, StepSampler};
use crate::env::{Environment, PeriodicEnvironment};
use crate::error::{Error, Result};
use crate::periodic::{exact_return_probability, periodic_rate0};
use crate::rate::{log_mgf, tilt};

/// A Monte Carlo (or exact) estimate of `P(X_N = 0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnEstimate {
    pub method: String,
    pub n: usize,
    pub samples: usize,
    pub estimate: f64,
    /// `ln` of the estimate; finite even when `estimate` underflows.
    pub log_estimate: f64,
    pub stderr: f64,
    /// Trajectories that returned.
    pub hits: usize,
}

/// Running sums of `w` and `w^2` scaled by `exp(-shift)`, mergeable.
#[derive(Debug, Clone, Copy)]
struct LogAccumulator {
    shift: f64,
    s1: f64,
    s2: f64,
    hits: usize,
}

impl LogAccumulator {
    fn empty() -> Self {
        Self { shift: f64::NEG_INFINITY, s1: 0.0, s2: 0.0, hits: 0 }
    }

    fn push(&mut self, lw: f64) {
        self.merge(&Self { shift: lw, s1: 1.0, s2: 1.0, hits: 1 });
    }

    fn merge(&mut self, o: &Self) {
        if o.hits == 0 {
            return;
        }
        if self.hits == 0 {
            *self = *o;
            return;
        }
        let m = self.shift.max(o.shift);
        let (a, b) = ((self.shift - m).exp(), (o.shift - m).exp());
        self.s1 = self.s1 * a + o.s1 * b;
        self.s2 = self.s2 * a * a + o.s2 * b * b;
        self.shift = m;
        self.hits += o.hits;
    }
}

/// Unbiased estimate of `P_0(X_N = 0)` by sampling the walk in the
/// per-site tilted environment `sigma_x(e) e^{<theta, e> - Lambda_x(theta)}`
/// and weighting returns by `exp(sum_k Lambda_{omega(X_k)}(theta))`.
/// `theta = 0` is the naive frequency estimator.
pub fn importance_sampling_return(
    env: &dyn Environment,
    theta: &[f64],
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<ReturnEstimate> {
    let d = env.dim();
    if theta.len() != d {
        return Err(Error::invalid("tilt has the wrong dimension"));
    }
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let method = if theta.iter().all(|&t| t == 0.0) { "naive" } else { "importance" }.to_string();
    if n % 2 == 1 {
        return Ok(ReturnEstimate { method, n, samples, estimate: 0.0, log_estimate: f64::NEG_INFINITY, stderr: 0.0, hits: 0 });
    }
    let samplers: Vec<StepSampler> = env.palette().iter().map(|s| StepSampler::new(&tilt(s, theta))).collect();
    let lambdas: Vec<f64> = env.palette().iter().map(|s| log_mgf(s, theta)).collect();
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<Result<LogAccumulator>> = with_pool(workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream(seed, b as u64);
                let mut acc = LogAccumulator::empty();
                let mut x = vec![0i64; d];
                for _ in b * BLOCK..((b + 1) * BLOCK).min(samples) {
                    x.iter_mut().for_each(|v| *v = 0);
                    let mut lw = 0.0;
                    for _ in 0..n {
                        let c = env.class_at(&x)?;
                        lw += lambdas[c];
                        apply_step(&mut x, samplers[c].draw(&mut rng));
                    }
                    if x.iter().all(|&v| v == 0) {
                        acc.push(lw);
                    }
                }
                Ok(acc)
            })
            .collect()
    })?;
    let mut acc = LogAccumulator::empty();
    for p in parts {
        acc.merge(&p?);
    }
    let m = samples as f64;
    if acc.hits == 0 {
        return Ok(ReturnEstimate { method, n, samples, estimate: 0.0, log_estimate: f64::NEG_INFINITY, stderr: 0.0, hits: 0 });
    }
    let mean = acc.s1 / m;
    let var = (acc.s2 / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    let log_estimate = acc.shift + mean.ln();
    Ok(ReturnEstimate {
        method,
        n,
        samples,
        estimate: log_estimate.exp(),
        log_estimate,
        stderr: (var / m).sqrt() * acc.shift.exp(),
        hits: acc.hits,
    })
}

/// A way of computing `P(X_N = 0)` in a periodic environment.
pub trait ReturnEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, env: &PeriodicEnvironment, n: usize, samples: usize, seed: u64, workers: usize) -> Result<ReturnEstimate>;
}

/// Dynamic programming; ignores `samples` and `seed`.
pub struct ExactDp;

impl ReturnEstimator for ExactDp {
    fn name(&self) -> &'static str {
        "exact-dp"
    }

    fn estimate(&self, env: &PeriodicEnvironment, n: usize, _: usize, _: u64, _: usize) -> Result<ReturnEstimate> {
        let p = exact_return_probability(env, n)?;
        Ok(ReturnEstimate { method: self.name().into(), n, samples: 0, estimate: p, log_estimate: p.ln(), stderr: 0.0, hits: 0 })
    }
}

/// Tilted sampling at the minimiser of the environment's Perron root.
pub struct Importance;

impl ReturnEstimator for Importance {
    fn name(&self) -> &'static str {
        "importance"
    }

    fn estimate(&self, env: &PeriodicEnvironment, n: usize, samples: usize, seed: u64, workers: usize) -> Result<ReturnEstimate> {
        let theta = periodic_rate0(env, 1e-10)?.theta_at_min;
        importance_sampling_return(env, &theta, n, samples, seed, workers)
    }
}

/// Plain frequency of returns.
pub struct Naive;

impl ReturnEstimator for Naive {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn estimate(&self, env: &PeriodicEnvironment, n: usize, samples: usize, seed: u64, workers: usize) -> Result<ReturnEstimate> {
        importance_sampling_return(env, &vec![0.0; env.dim()], n, samples, seed, workers)
    }
}

pub fn return_estimators() -> Vec<Box<dyn ReturnEstimator>> {
    vec![Box::new(ExactDp), Box::new(Importance), Box::new(Naive)]
}

pub fn return_estimator(name: &str) -> Option<Box<dyn ReturnEstimator>> {
    return_estimators().into_iter().find(|e| e.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ProbVec;
    use crate::rate::minimizer_theta;

    fn pv(p: &[f64]) -> ProbVec {
        ProbVec::new(p.to_vec()).unwrap()
    }

    #[test]
    fn two_steps_in_a_biased_line() {
        let s = pv(&[0.8, 0.2]);
        let env = PeriodicEnvironment::homogeneous(s.clone()).unwrap();
        let est = importance_sampling_return(&env, &minimizer_theta(&s).unwrap(), 2, 10_000, 1, 2).unwrap();
        assert!((est.estimate - 0.32).abs() <= 3.0 * est.stderr.max(1e-12), "{est:?}");
    }

    #[test]
    fn hundred_steps_matches_dp_and_beats_naive() {
        let env = PeriodicEnvironment::homogeneous(pv(&[0.8, 0.2])).unwrap();
        let exact = ExactDp.estimate(&env, 100, 0, 0, 1).unwrap().estimate;
        let is = Importance.estimate(&env, 100, 20_000, 2, 4).unwrap();
        assert!((is.estimate - exact).abs() <= 3.0 * is.stderr, "{is:?} vs {exact}");
        // the naive variance is p(1 - p) per sample
        let naive_var = exact * (1.0 - exact);
        let is_var = is.stderr.powi(2) * is.samples as f64;
        assert!(naive_var / is_var >= 10.0);
    }

    #[test]
    fn symmetric_weights_are_one() {
        let env = PeriodicEnvironment::homogeneous(pv(&[0.5, 0.5])).unwrap();
        let theta = minimizer_theta(&pv(&[0.5, 0.5])).unwrap();
        assert_eq!(theta, vec![0.0]);
        let a = importance_sampling_return(&env, &[0.0], 10, 5000, 3, 1).unwrap();
        assert_eq!(a.estimate, a.hits as f64 / 5000.0);
    }

    #[test]
    fn odd_steps_are_exactly_zero() {
        let env = PeriodicEnvironment::homogeneous(pv(&[0.7, 0.3])).unwrap();
        for e in return_estimators() {
            assert_eq!(e.estimate(&env, 7, 100, 0, 1).unwrap().estimate, 0.0, "{}", e.name());
        }
    }

    #[test]
    fn independent_of_worker_count() {
        let env = PeriodicEnvironment::homogeneous(pv(&[0.3, 0.2, 0.3, 0.2])).unwrap();
        let a = importance_sampling_return(&env, &[0.1, -0.1], 12, 10_000, 8, 1).unwrap();
        let b = importance_sampling_return(&env, &[0.1, -0.1], 12, 10_000, 8, 5).unwrap();
        assert_eq!(a, b);
    }
}
