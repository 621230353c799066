use serde::Serialize;

use super::scan::{ball_radius, search_radius};
use crate::env::{Environment, PeriodicEnvironment};
use crate::error::{Error, Result};
use crate::periodic::{periodic_rate0, return_probability_series, DpOptions};

/// Even block lengths used to fit the local-limit exponent.
pub const CLT_LENGTHS: std::ops::RangeInclusive<usize> = 4..=64;

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub n: usize,
    pub delta: f64,
    pub ball_radius: i64,
    /// `L = 2 floor(delta (ln n)^{1/d})`.
    pub block_length: usize,
    /// `floor((n - 2 a_n) / L)`.
    pub blocks: usize,
    /// `ln rho(theta*) = -rate0`, the Perron root at the minimiser.
    pub log_rho: f64,
    pub theta_star: Vec<f64>,
    /// `P(X_L = 0)` in the untilted environment.
    pub block_probability: f64,
    /// `ln P_*(X_L = 0) = ln P(X_L = 0) - L ln rho`.
    pub log_tilted_block: f64,
    /// `blocks * ln P_*(X_L = 0)`.
    pub log_bound: f64,
    /// Slope of `ln P_*(X_L = 0)` against `ln L` over even `L` in 4..=64.
    pub clt_exponent: f64,
    pub clt_log_prefactor: f64,
}

/// `2 floor(delta (ln n)^{1/d})`.
pub fn block_length(delta: f64, n: usize, dim: usize) -> usize {
    2 * ball_radius(delta, n, dim).max(0) as usize
}

/// The confined single-block return probability under the `h`-transformed
/// (tilted) walk, raised to the number of blocks. A closed path of length
/// `L` never leaves the sup-norm ball of radius `L / 2`, so confinement to
/// the ball is automatic and the unconfined dynamic programme is exact.
///
/// Under the `h`-transform at `theta*`, a closed path's probability is its
/// original probability times `rho^{-L}`, so no eigenvector is needed.
pub fn block_return_bound(env: &PeriodicEnvironment, delta: f64, n: usize, tol: f64) -> Result<BlockReport> {
    let d = env.dim();
    let l = block_length(delta, n, d);
    if l < 2 {
        return Err(Error::invalid(format!("block length {l} at n = {n}; increase delta or n")));
    }
    let a = search_radius(n) as usize;
    let blocks = n.saturating_sub(2 * a) / l;
    let rate = periodic_rate0(env, tol)?;
    let log_rho = -rate.rate0;
    let mut lengths: Vec<usize> = CLT_LENGTHS.step_by(2).collect();
    lengths.push(l);
    let series = return_probability_series(env, &lengths, &DpOptions::default())?;
    let tilted = |k: usize| series[k].log_probability - lengths[k] as f64 * log_rho;
    let last = lengths.len() - 1;
    let (slope, intercept) = regress(
        &(0..last).map(|k| (lengths[k] as f64).ln()).collect::<Vec<_>>(),
        &(0..last).map(tilted).collect::<Vec<_>>(),
    );
    let log_tilted_block = tilted(last);
    Ok(BlockReport {
        n,
        delta,
        ball_radius: (l / 2) as i64,
        block_length: l,
        blocks,
        log_rho,
        theta_star: rate.theta_at_min,
        block_probability: series[last].probability,
        log_tilted_block,
        log_bound: blocks as f64 * log_tilted_block,
        clt_exponent: slope,
        clt_log_prefactor: intercept,
    })
}

/// Least-squares line `y = slope x + intercept`.
fn regress(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
