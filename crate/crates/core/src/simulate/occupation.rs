use serde::Serialize;

use super::walk::{run_walk_with, WalkOptions};
use crate::error::{Error, Result};
use crate::strip::{strip_index, StripBuildReport};

#[derive(Debug, Clone, Serialize)]
pub struct OccupationReport {
    pub steps: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub fractions: Vec<f64>,
    pub targets: Vec<f64>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Fraction of times `0..=N` the walk in a strip environment spends in
/// each strip, against the target frequencies recorded by the builder.
/// Pass it the tilted (zero-drift) strips for the frequencies to be met.
pub fn occupation_check(report: &StripBuildReport, n: usize, seed: u64, epsilon: f64) -> Result<OccupationReport> {
    let targets = report
        .targets
        .clone()
        .ok_or_else(|| Error::invalid("strip report carries no target frequencies"))?;
    let spec = &report.spec;
    let classify = |x: &[i64]| strip_index(spec, x);
    let opts = WalkOptions { classes: Some((spec.num_strips(), &classify)), record_trace: false };
    let run = run_walk_with(&report.environment, &vec![0; spec.dim()], n, seed, &opts)?;
    let total = (n + 1) as f64;
    let fractions: Vec<f64> = run.occupation.iter().map(|&c| c as f64 / total).collect();
    let max_deviation = fractions.iter().zip(&targets).map(|(f, t)| (f - t).abs()).fold(0.0, f64::max);
    Ok(OccupationReport { steps: n, seed, epsilon, fractions, targets, max_deviation, pass: max_deviation <= epsilon })
}
