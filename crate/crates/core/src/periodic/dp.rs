use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::env::{step_dot, step_vector, Environment, PeriodicEnvironment};
use crate::error::{Error, Result};
use crate::rate::averaged_minimizer;

/// Largest step count accepted by default in dimension `dim`.
pub fn default_dp_cap(dim: usize) -> usize {
    match dim {
        1 => 4000,
        2 => 400,
        _ => 120,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnProbability {
    pub n: usize,
    pub probability: f64,
    pub log_probability: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DpOptions {
    pub cap: Option<usize>,
    /// Tilt applied to every step; closed paths are unaffected, so any
    /// choice gives the same answer. Defaults to [`balancing_theta`].
    pub balance: Option<Vec<f64>>,
    /// Starting (and returning) site; defaults to the origin.
    pub start: Option<Vec<i64>>,
}

/// The tilt minimising the cell-averaged log-mgf, which roughly cancels
/// the drift so the mass near the start does not underflow.
pub fn balancing_theta(env: &PeriodicEnvironment) -> Result<Vec<f64>> {
    let mut counts = vec![0.0; env.palette().len()];
    for &c in env.cells() {
        counts[c] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    let weights: Vec<f64> = counts.iter().map(|c| c / total).collect();
    Ok(averaged_minimizer(env.palette(), &weights, 1e-10)?.1)
}

/// `P(X_N = 0)` for the walk in `env` started at the origin, by forward
/// dynamic programming. Odd `N` gives exactly zero.
pub fn exact_return_probability(env: &PeriodicEnvironment, n: usize) -> Result<f64> {
    Ok(return_probability_series(env, &[n], &DpOptions::default())?[0].probability)
}

/// Return probabilities at every requested step count, from one forward
/// pass to the largest of them.
pub fn return_probability_series(
    env: &PeriodicEnvironment,
    ns: &[usize],
    opts: &DpOptions,
) -> Result<Vec<ReturnProbability>> {
    let d = env.dim();
    let cap = opts.cap.unwrap_or_else(|| default_dp_cap(d));
    let n_max = ns.iter().copied().max().unwrap_or(0);
    if n_max > cap {
        return Err(Error::ResourceCap(format!("{n_max} steps exceeds the dimension-{d} cap of {cap}")));
    }
    let env = match &opts.start {
        Some(s) => env.translated(s),
        None => env.clone(),
    };
    let theta = match &opts.balance {
        Some(t) => t.clone(),
        None => balancing_theta(&env)?,
    };
    let weights: Vec<Vec<f64>> = env
        .palette()
        .iter()
        .map(|p| (0..2 * d).map(|k| p.get(k) * step_dot(&theta, k).exp()).collect())
        .collect();
    let radius = (n_max / 2) as i64;
    let log_at_origin = if d <= 2 {
        dense_pass(&env, &weights, radius, n_max)
    } else {
        sparse_pass(&env, &weights, radius, n_max)
    };
    Ok(ns
        .iter()
        .map(|&n| {
            let lp = if n % 2 == 1 { f64::NEG_INFINITY } else { log_at_origin[n] };
            ReturnProbability { n, probability: lp.exp(), log_probability: lp }
        })
        .collect())
}

/// Log of the (untilted) return mass after each step `0..=n_max`.
fn dense_pass(env: &PeriodicEnvironment, weights: &[Vec<f64>], radius: i64, n_max: usize) -> Vec<f64> {
    let d = env.dim();
    let side = (2 * radius + 3) as usize; // one layer of zero padding
    let sites = side.pow(d as u32);
    let strides: Vec<usize> = (0..d).map(|a| side.pow(a as u32)).collect();
    let coords = |mut i: usize| -> Vec<i64> {
        (0..d)
            .map(|_| {
                let c = (i % side) as i64 - radius - 1;
                i /= side;
                c
            })
            .collect()
    };
    let interior = |x: &[i64]| x.iter().all(|v| v.abs() <= radius);
    let mut class = vec![u32::MAX; sites];
    for (i, c) in class.iter_mut().enumerate() {
        let x = coords(i);
        if interior(&x) {
            *c = env.cells()[env.cell_index(&x)] as u32;
        }
    }
    let origin: usize = strides.iter().map(|s| s * (radius as usize + 1)).sum();
    let mut cur = vec![0.0; sites];
    let mut next = vec![0.0; sites];
    cur[origin] = 1.0;
    let mut log_scale = 0.0;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    let offsets: Vec<(usize, bool)> = (0..2 * d).map(|k| (strides[k / 2], k % 2 == 0)).collect();
    for _ in 1..=n_max {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &m) in cur.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let w = &weights[class[i] as usize];
            for (k, &(s, plus)) in offsets.iter().enumerate() {
                let j = if plus { i + s } else { i - s };
                next[j] += m * w[k];
            }
        }
        // mass pushed into the padding can no longer return in time
        let mut top = 0.0f64;
        for (i, v) in next.iter_mut().enumerate() {
            if class[i] == u32::MAX {
                *v = 0.0;
            } else {
                top = top.max(*v);
            }
        }
        if top > 0.0 {
            next.iter_mut().for_each(|v| *v /= top);
            log_scale += top.ln();
        }
        std::mem::swap(&mut cur, &mut next);
        out.push(log_scale + cur[origin].ln());
    }
    out
}

fn sparse_pass(env: &PeriodicEnvironment, weights: &[Vec<f64>], radius: i64, n_max: usize) -> Vec<f64> {
    let d = env.dim();
    let origin = vec![0i64; d];
    let steps: Vec<Vec<i64>> = (0..2 * d).map(|k| step_vector(d, k)).collect();
    let mut cur: HashMap<Vec<i64>, f64> = HashMap::from([(origin.clone(), 1.0)]);
    let mut log_scale = 0.0;
    let mut out = vec![0.0];
    for step in 1..=n_max {
        let remaining = (n_max - step) as i64;
        let mut next: HashMap<Vec<i64>, f64> = HashMap::with_capacity(cur.len() * 2);
        for (x, &m) in &cur {
            let w = &weights[env.cells()[env.cell_index(x)]];
            for (k, e) in steps.iter().enumerate() {
                let y: Vec<i64> = x.iter().zip(e).map(|(a, b)| a + b).collect();
                // prune sites that cannot get back to the origin in time
                if y.iter().any(|v| v.abs() > radius) || y.iter().map(|v| v.abs()).sum::<i64>() > remaining {
                    continue;
                }
                *next.entry(y).or_insert(0.0) += m * w[k];
            }
        }
        let top = next.values().cloned().fold(0.0f64, f64::max);
        if top > 0.0 {
            next.values_mut().for_each(|v| *v /= top);
            log_scale += top.ln();
        }
        cur = next;
        out.push(log_scale + cur.get(&origin).copied().unwrap_or(0.0).ln());
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    /// Exponential decay rate: `log P ~ -rate N + log_power log N + intercept`.
    pub rate: f64,
    pub log_power: f64,
    pub intercept: f64,
}

/// Least-squares fit of `log P` against `(N, log N, 1)`.
pub fn fit_rate(points: &[ReturnProbability]) -> Result<SlopeFit> {
    let pts: Vec<&ReturnProbability> = points.iter().filter(|p| p.log_probability.is_finite()).collect();
    if pts.len() < 3 {
        return Err(Error::invalid("a slope fit needs at least three positive probabilities"));
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => pts[i].n as f64,
        1 => (pts[i].n as f64).ln(),
        _ => 1.0,
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.log_probability));
    let coef = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(SlopeFit { rate: -coef[0], log_power: coef[1], intercept: coef[2] })
}
