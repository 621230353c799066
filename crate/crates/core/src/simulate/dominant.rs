use serde::Serialize;

use super::scan::{ball_radius, scan_environment, search_radius, ScanMode, DEFAULT_SITE_CAP};
use crate::env::{l1_norm, Environment, PeriodicEnvironment};
use crate::error::{Error, Result};
use crate::periodic::{return_probability_series, DpOptions};

#[derive(Debug, Clone, Serialize)]
pub struct DominantEventReport {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// `floor(N / ln N)`.
    pub a_n: i64,
    /// Matched ball center, the hit nearest the origin in `l1`.
    pub center: Vec<i64>,
    /// Length of each corridor path, `a_N` or `a_N - 1` for parity.
    pub corridor_length: i64,
    pub kappa: f64,
    pub ball_radius: i64,
    pub block_length: usize,
    pub blocks: usize,
    /// Steps in the final partial block.
    pub leftover: usize,
    /// Corridor out to the center and back: `a_N ln kappa` each.
    pub log_a1: f64,
    pub log_a3: f64,
    /// Repeated confined returns to the center, including the mismatch
    /// discount.
    pub log_a2: f64,
    /// `2 a_N ln kappa`.
    pub corridor_bound: f64,
    /// `-(N - 2 l) ln(1 + eps / kappa)`.
    pub mismatch: f64,
    pub total: f64,
    pub per_step: f64,
    /// `-I(0) N`, when supplied.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DominantOutcome {
    Realized(DominantEventReport),
    /// No matching ball within `l1` distance `a_N`: event G did not
    /// occur at this `N`. Not an error.
    NotRealized { n: usize, reason: String },
}

/// Lower bound on `ln P_{0,omega}(X_N = 0)` from the strategy: walk a
/// deterministic corridor to a ball where `omega` is `eps`-close to the
/// periodic `target`, return to its center every `L` steps, walk back.
///
/// In the ball each step's probability under `omega` is at least the
/// target's divided by `1 + eps / kappa`, which is the mismatch discount.
pub fn dominant_event_bound(
    omega: &dyn Environment,
    target: &PeriodicEnvironment,
    epsilon: f64,
    delta: f64,
    n: usize,
    i0: Option<f64>,
) -> Result<DominantOutcome> {
    if n % 2 == 1 {
        return Err(Error::invalid("the return probability vanishes at odd N"));
    }
    let d = omega.dim();
    let a = search_radius(n);
    let b = ball_radius(delta, n, d);
    if b < 1 {
        return Err(Error::invalid(format!("ball radius is 0 at N = {n}; increase delta")));
    }
    let scan = scan_environment(omega, target, epsilon, delta, n, ScanMode::Nearest, DEFAULT_SITE_CAP)?;
    let center = match scan.hits.first() {
        Some(z) if l1_norm(z) <= a => z.clone(),
        Some(z) => {
            return Ok(DominantOutcome::NotRealized {
                n,
                reason: format!("nearest matching ball at l1 distance {} > a_N = {a}", l1_norm(z)),
            })
        }
        None => {
            let why = if scan.complete { "no matching ball in the search box" } else { "site cap reached before a match" };
            return Ok(DominantOutcome::NotRealized { n, reason: why.into() });
        }
    };
    let ell = if (a - l1_norm(&center)) % 2 == 0 { a } else { a - 1 };
    let n2 = n as i64 - 2 * ell;
    if n2 < 0 {
        return Err(Error::invalid(format!("N = {n} is too small for corridors of length {ell}")));
    }
    let n2 = n2 as usize;
    let l = 2 * b as usize;
    let (blocks, leftover) = (n2 / l, n2 % l);
    let opts = DpOptions { start: Some(center.clone()), ..DpOptions::default() };
    let series = return_probability_series(target, &[l, leftover], &opts)?;
    let kappa = omega.kappa();
    let mismatch = -(n2 as f64) * (1.0 + epsilon / kappa).ln();
    let log_a2 = blocks as f64 * series[0].log_probability + series[1].log_probability + mismatch;
    let log_a1 = a as f64 * kappa.ln();
    let total = 2.0 * log_a1 + log_a2;
    Ok(DominantOutcome::Realized(DominantEventReport {
        n,
        epsilon,
        delta,
        a_n: a,
        center,
        corridor_length: ell,
        kappa,
        ball_radius: b,
        block_length: l,
        blocks,
        leftover,
        log_a1,
        log_a3: log_a1,
        log_a2,
        corridor_bound: 2.0 * log_a1,
        mismatch,
        total,
        per_step: total / n as f64,
        reference: i0.map(|i| -i * n as f64),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvironmentLaw, ProbVec, SiteSampler};
    use crate::periodic::exact_return_probability;

    fn pv(p: &[f64]) -> ProbVec {
        ProbVec::new(p.to_vec()).unwrap()
    }

    fn realized(o: DominantOutcome) -> DominantEventReport {
        match o {
            DominantOutcome::Realized(r) => r,
            DominantOutcome::NotRealized { reason, .. } => panic!("{reason}"),
        }
    }

    #[test]
    fn corridor_arithmetic() {
        // a_N = 10 at N = 40
        let env = PeriodicEnvironment::homogeneous(pv(&[0.5, 0.5])).unwrap();
        let r = realized(dominant_event_bound(&env, &env, 0.0, 1.0, 40, Some(0.0)).unwrap());
        assert_eq!(r.a_n, 10);
        assert_eq!(r.corridor_bound, 20.0 * 0.5f64.ln());
        assert_eq!(r.center, vec![0]);
        assert_eq!(r.corridor_length, 10);
        assert!((r.total - (r.log_a1 + r.log_a2 + r.log_a3)).abs() < 1e-12);
    }

    #[test]
    fn sound_on_periodic_inputs() {
        let a = pv(&[0.8, 0.2]);
        let b = pv(&[0.3, 0.7]);
        let env = PeriodicEnvironment::from_table(vec![2], vec![a, b]).unwrap();
        for n in [20, 100, 400, 2000] {
            let r = realized(dominant_event_bound(&env, &env, 0.0, 1.5, n, None).unwrap());
            let exact = exact_return_probability(&env, n).unwrap().ln();
            assert!(r.total <= exact + 1e-9, "{n}: {} > {exact}", r.total);
        }
    }

    #[test]
    fn symmetric_target_improves_with_n() {
        let env = PeriodicEnvironment::homogeneous(ProbVec::symmetric(2)).unwrap();
        let per: Vec<f64> = [100, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| realized(dominant_event_bound(&env, &env, 0.0, 2.0, n, Some(0.0)).unwrap()).per_step)
            .collect();
        assert!(per.windows(2).all(|w| w[1] > w[0]), "{per:?}");
    }

    #[test]
    fn sampled_environment_with_mismatch() {
        let law = EnvironmentLaw::uniform(vec![pv(&[0.3, 0.2, 0.25, 0.25]), pv(&[0.2, 0.3, 0.25, 0.25])], 0.2).unwrap();
        let omega = SiteSampler::new(law, 3);
        let target = PeriodicEnvironment::homogeneous(ProbVec::symmetric(2)).unwrap();
        let r = realized(dominant_event_bound(&omega, &target, 0.05, 0.7, 400, None).unwrap());
        assert_eq!(r.center, vec![0, 0]);
        assert!(r.mismatch < 0.0);
        // too strict a tolerance: no ball matches
        match dominant_event_bound(&omega, &target, 0.01, 0.7, 400, None).unwrap() {
            DominantOutcome::NotRealized { .. } => {}
            DominantOutcome::Realized(r) => panic!("unexpected {r:?}"),
        }
    }
}
