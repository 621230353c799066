use rand::Rng;
use serde::Serialize;

use super::rng::stream;
use crate::env::{step_axis_sign, Environment, ProbVec};
use crate::error::{Error, Result};

/// Cumulative step distribution, last entry forced to cover `[0, 1)`.
#[derive(Debug, Clone)]
pub(crate) struct StepSampler(Vec<f64>);

impl StepSampler {
    pub(crate) fn new(sigma: &ProbVec) -> Self {
        let mut acc = 0.0;
        let mut c: Vec<f64> = sigma
            .as_slice()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *c.last_mut().unwrap() = f64::INFINITY;
        Self(c)
    }

    #[inline]
    pub(crate) fn draw(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        self.0.partition_point(|&c| c <= u)
    }
}

#[inline]
pub(crate) fn apply_step(x: &mut [i64], k: usize) {
    let (axis, sign) = step_axis_sign(k);
    x[axis] += sign;
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkRun {
    pub start: Vec<i64>,
    pub steps: usize,
    pub seed: u64,
    pub endpoint: Vec<i64>,
    /// Visits per class over times `0..=steps`; sums to `steps + 1`.
    pub occupation: Vec<u64>,
    /// Largest sup-norm distance from the start.
    pub max_displacement: i64,
    /// Step indices taken, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<u8>>,
}

/// Options for [`run_walk_with`].
pub struct WalkOptions<'a> {
    /// Site classifier for occupation counts; defaults to the palette index.
    pub classes: Option<(usize, &'a (dyn Fn(&[i64]) -> usize + Sync))>,
    pub record_trace: bool,
}

/// The quenched walk from `start` for `n` steps, on stream 0 of `seed`.
pub fn run_walk(env: &dyn Environment, start: &[i64], n: usize, seed: u64) -> Result<WalkRun> {
    run_walk_with(env, start, n, seed, &WalkOptions { classes: None, record_trace: false })
}

pub fn run_walk_with(env: &dyn Environment, start: &[i64], n: usize, seed: u64, opts: &WalkOptions) -> Result<WalkRun> {
    if start.len() != env.dim() {
        return Err(Error::invalid("start point has the wrong dimension"));
    }
    let samplers: Vec<StepSampler> = env.palette().iter().map(StepSampler::new).collect();
    let n_classes = opts.classes.map_or(samplers.len(), |c| c.0);
    let mut occupation = vec![0u64; n_classes];
    let mut trace = opts.record_trace.then(|| Vec::with_capacity(n));
    let mut rng = stream(seed, 0);
    let mut x = start.to_vec();
    let mut max_displacement = 0;
    for t in 0..=n {
        let c = env.class_at(&x)?;
        let cls = opts.classes.map_or(c, |(_, f)| f(&x));
        occupation[cls] += 1;
        if t == n {
            break;
        }
        let k = samplers[c].draw(&mut rng);
        apply_step(&mut x, k);
        if let Some(tr) = trace.as_mut() {
            tr.push(k as u8);
        }
        let (axis, _) = step_axis_sign(k);
        max_displacement = max_displacement.max((x[axis] - start[axis]).abs());
    }
    Ok(WalkRun { start: start.to_vec(), steps: n, seed, endpoint: x, occupation, max_displacement, trace })
}
