use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::rng::{derive_seed, stream, with_pool, BLOCK};
use super::walk::{apply_step, StepSampler};
use crate::env::{linf_norm, Environment};
use crate::error::{Error, Result};
use crate::strip::{strip_index, StripSpec};

/// One composed run: the walk `X_n = sum_i Z^(i)_{tau_i(n-1)}` where the
/// walk in strip `i` always advances its own independent walk `Z^(i)`.
struct Composed {
    endpoint: Vec<i64>,
    /// Steps each `Z^(i)` took while driving `X`, i.e. `tau_i(n - 1)`.
    counters: Vec<usize>,
    /// `Z^(i)` at the requested times.
    marks: Vec<Option<Vec<i64>>>,
}

fn compose(spec: &StripSpec, samplers: &[StepSampler], n: usize, mark_at: &[usize], rngs: &mut [ChaCha8Rng]) -> Composed {
    let d = spec.dim();
    let j = spec.num_strips();
    let mut z = vec![vec![0i64; d]; j];
    let mut counters = vec![0usize; j];
    let mut marks: Vec<Option<Vec<i64>>> = mark_at.iter().map(|&m| (m == 0).then(|| vec![0; d])).collect();
    let mut x = vec![0i64; d];
    let mut advance = |i: usize, z: &mut Vec<Vec<i64>>, counters: &mut Vec<usize>, x: Option<&mut Vec<i64>>| {
        let k = samplers[i].draw(&mut rngs[i]);
        apply_step(&mut z[i], k);
        if let Some(x) = x {
            apply_step(x, k);
        }
        counters[i] += 1;
        if counters[i] == mark_at[i] {
            marks[i] = Some(z[i].clone());
        }
    };
    for _ in 0..n {
        let i = strip_index(spec, &x);
        advance(i, &mut z, &mut counters, Some(&mut x));
    }
    let tau = counters.clone();
    for i in 0..j {
        while counters[i] < mark_at[i] {
            advance(i, &mut z, &mut counters, None);
        }
    }
    Composed { endpoint: x, counters: tau, marks }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposedReport {
    pub steps: usize,
    pub epsilon: f64,
    pub runs: usize,
    pub seed: u64,
    pub t_star: Vec<f64>,
    /// Frequency of `A`: every `Z^(i)` at time `n t_i` is within
    /// `n eps / 2j` (sup norm) of `n t_i d(sigma_i)`.
    pub freq_a: f64,
    /// Frequency of `B`: every counter `tau_i(n-1)` is within `n eps / 2j`
    /// of `n t_i`.
    pub freq_b: f64,
    pub freq_ab: f64,
    pub mean_counter_fraction: Vec<f64>,
}

/// Runs the composed construction `runs` times, each on its own derived
/// seed, and reports how often the law-of-large-numbers events hold.
pub fn decomposed_rwpe_run(
    spec: &StripSpec,
    t_star: &[f64],
    n: usize,
    epsilon: f64,
    runs: usize,
    seed: u64,
    workers: usize,
) -> Result<DecomposedReport> {
    let j = spec.num_strips();
    if t_star.len() != j {
        return Err(Error::invalid("one frequency per strip is required"));
    }
    let samplers: Vec<StepSampler> = spec.sigmas.iter().map(StepSampler::new).collect();
    let drifts: Vec<Vec<f64>> = spec.sigmas.iter().map(|s| s.drift()).collect();
    let mark_at: Vec<usize> = t_star.iter().map(|t| (n as f64 * t).floor() as usize).collect();
    let slack = n as f64 * epsilon / (2.0 * j as f64);
    let outcomes: Vec<(bool, bool, Vec<usize>)> = with_pool(workers, || {
        (0..runs)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(seed, r as u64);
                let mut rngs: Vec<ChaCha8Rng> = (0..j).map(|i| stream(s, i as u64)).collect();
                let c = compose(spec, &samplers, n, &mark_at, &mut rngs);
                let a = (0..j).all(|i| {
                    let zi = c.marks[i].as_ref().expect("marked");
                    let nt = n as f64 * t_star[i];
                    zi.iter().zip(&drifts[i]).all(|(z, dr)| (*z as f64 - nt * dr).abs() <= slack)
                });
                let b = (0..j).all(|i| (c.counters[i] as f64 - n as f64 * t_star[i]).abs() <= slack);
                (a, b, c.counters)
            })
            .collect()
    })?;
    let runs_f = runs.max(1) as f64;
    let count = |f: &dyn Fn(&(bool, bool, Vec<usize>)) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / runs_f;
    let mut mean_counter_fraction = vec![0.0; j];
    for (_, _, c) in &outcomes {
        for i in 0..j {
            mean_counter_fraction[i] += c[i] as f64 / (n.max(1) as f64 * runs_f);
        }
    }
    Ok(DecomposedReport {
        steps: n,
        epsilon,
        runs,
        seed,
        t_star: t_star.to_vec(),
        freq_a: count(&|o| o.0),
        freq_b: count(&|o| o.1),
        freq_ab: count(&|o| o.0 && o.1),
        mean_counter_fraction,
    })
}

/// Empirical law of the composed walk's position after `n` steps.
pub fn composed_endpoint_law(spec: &StripSpec, n: usize, samples: usize, seed: u64, workers: usize) -> Result<BTreeMap<Vec<i64>, f64>> {
    let j = spec.num_strips();
    let samplers: Vec<StepSampler> = spec.sigmas.iter().map(StepSampler::new).collect();
    let marks = vec![0usize; j];
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<BTreeMap<Vec<i64>, u64>> = with_pool(workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let s = derive_seed(seed, b as u64);
                let mut rngs: Vec<ChaCha8Rng> = (0..j).map(|i| stream(s, i as u64)).collect();
                let mut counts = BTreeMap::new();
                for _ in b * BLOCK..((b + 1) * BLOCK).min(samples) {
                    *counts.entry(compose(spec, &samplers, n, &marks, &mut rngs).endpoint).or_insert(0) += 1;
                }
                counts
            })
            .collect()
    })?;
    let mut law = BTreeMap::new();
    for part in parts {
        for (k, c) in part {
            *law.entry(k).or_insert(0.0) += c as f64 / samples as f64;
        }
    }
    Ok(law)
}

/// Exact law of `X_n` from `start` by enumerating all paths' mass.
pub fn exact_endpoint_law(env: &dyn Environment, start: &[i64], n: usize) -> Result<BTreeMap<Vec<i64>, f64>> {
    let mut law = BTreeMap::from([(start.to_vec(), 1.0)]);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (x, p) in &law {
            let sigma = env.site(x)?;
            for k in 0..2 * env.dim() {
                let mut y = x.clone();
                apply_step(&mut y, k);
                *next.entry(y).or_insert(0.0) += p * sigma.get(k);
            }
        }
        law = next;
    }
    Ok(law)
}

/// Total variation distance between two finitely supported laws.
pub fn total_variation(a: &BTreeMap<Vec<i64>, f64>, b: &BTreeMap<Vec<i64>, f64>) -> f64 {
    let mut tv = 0.0;
    for (k, p) in a {
        tv += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            tv += q;
        }
    }
    0.5 * tv
}

/// Largest sup-norm distance of any point in a law's support.
pub fn support_radius(law: &BTreeMap<Vec<i64>, f64>) -> i64 {
    law.keys().map(|x| linf_norm(x)).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ProbVec;
    use crate::strip::build_strip_environment;

    fn pv(p: &[f64]) -> ProbVec {
        ProbVec::new(p.to_vec()).unwrap()
    }

    #[test]
    fn single_strip_counter_is_n() {
        let spec = StripSpec::new(vec![0, 1], vec![0, 4], vec![pv(&[0.25; 4])]).unwrap();
        let rep = decomposed_rwpe_run(&spec, &[1.0], 2000, 0.1, 20, 3, 2).unwrap();
        assert_eq!(rep.freq_b, 1.0);
        assert!(rep.freq_a >= 0.9);
    }

    #[test]
    fn two_step_law_matches_direct_walk() {
        let spec = StripSpec::new(vec![1, 1], vec![0, 1, 3], vec![pv(&[0.4, 0.1, 0.3, 0.2]), pv(&[0.1, 0.3, 0.2, 0.4])]).unwrap();
        let env = build_strip_environment(&spec).unwrap().environment;
        let exact = exact_endpoint_law(&env, &[0, 0], 2).unwrap();
        assert!((exact.values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(support_radius(&exact), 2);
        let emp = composed_endpoint_law(&spec, 2, 100_000, 5, 3).unwrap();
        assert!(total_variation(&emp, &exact) <= 0.01);
        // worker count does not change the sample
        assert_eq!(emp, composed_endpoint_law(&spec, 2, 100_000, 5, 1).unwrap());
    }
}
