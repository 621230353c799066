//! Strip-periodic environments: the lattice is cut into parallel strips
//! perpendicular to an integer direction `u`, strip `l` using `sigmas[l]`,
//! and the pattern repeats with period `r_j` in `<x, u>`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::env::{classify_law, step_vector, EnvironmentLaw, Nestling, PeriodicEnvironment, ProbVec};
use crate::error::{Error, Result};
use crate::env::step_dot;
use crate::periodic::{minimise_operator_legendre, TorusOperator};
use crate::rate::{averaged_minimizer, tilt, variational_i0};

/// Default warning threshold on the orthogonality residual.
pub const DEFAULT_ETA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StripRaw")]
pub struct StripSpec {
    pub u: Vec<i64>,
    /// `0 = r_0 < r_1 < ... < r_j`; strip `l` (0-based) covers residues
    /// `r_l <= <x, u> mod r_j < r_{l+1}`.
    pub radii: Vec<i64>,
    pub sigmas: Vec<ProbVec>,
    /// `max_i |<drift_i, u>| / |u|_2` for the drifts the direction was
    /// chosen against.
    pub orth_residual: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StripRaw {
    u: Vec<i64>,
    radii: Vec<i64>,
    sigmas: Vec<ProbVec>,
    #[serde(default)]
    orth_residual: Option<f64>,
}

impl TryFrom<StripRaw> for StripSpec {
    type Error = Error;

    fn try_from(raw: StripRaw) -> Result<Self> {
        let spec = Self::new(raw.u, raw.radii, raw.sigmas)?;
        Ok(match raw.orth_residual {
            Some(r) => spec.with_orth_residual(r),
            None => spec,
        })
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn dot(u: &[i64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| *a as f64 * b).sum()
}

fn euclid_norm(u: &[i64]) -> f64 {
    u.iter().map(|a| (a * a) as f64).sum::<f64>().sqrt()
}

/// `max_i |<d_i, u>| / |u|_2`.
pub fn orthogonality_residual(drifts: &[Vec<f64>], u: &[i64]) -> f64 {
    let n = euclid_norm(u);
    drifts.iter().map(|d| dot(u, d).abs() / n).fold(0.0, f64::max)
}

impl StripSpec {
    /// Validates the geometry; the residual is computed against the drifts
    /// of `sigmas`.
    pub fn new(u: Vec<i64>, radii: Vec<i64>, sigmas: Vec<ProbVec>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::invalid("a strip spec needs at least one vector"));
        }
        let d = sigmas[0].dim();
        if sigmas.iter().any(|s| s.dim() != d) || u.len() != d {
            return Err(Error::invalid("u and all vectors must share a dimension"));
        }
        if u.iter().all(|&a| a == 0) {
            return Err(Error::invalid("u must be nonzero"));
        }
        if u.iter().fold(0, |g, &a| gcd(g, a)) != 1 {
            return Err(Error::invalid("u must be primitive (entries with gcd 1)"));
        }
        if radii.len() != sigmas.len() + 1 || radii[0] != 0 || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("radii must be 0 = r_0 < r_1 < ... < r_j with one strip per vector"));
        }
        let drifts: Vec<Vec<f64>> = sigmas.iter().map(ProbVec::drift).collect();
        let orth_residual = orthogonality_residual(&drifts, &u);
        Ok(Self { u, radii, sigmas, orth_residual })
    }

    pub fn with_orth_residual(mut self, r: f64) -> Self {
        self.orth_residual = r;
        self
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn num_strips(&self) -> usize {
        self.sigmas.len()
    }

    pub fn strip_period(&self) -> i64 {
        *self.radii.last().unwrap()
    }

    pub fn widths(&self) -> Vec<i64> {
        self.radii.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Same geometry with other vectors on the strips.
    pub fn with_sigmas(&self, sigmas: Vec<ProbVec>) -> Result<Self> {
        let r = self.orth_residual;
        Ok(Self::new(self.u.clone(), self.radii.clone(), sigmas)?.with_orth_residual(r))
    }
}

/// 0-based index of the strip containing `x`.
pub fn strip_index(spec: &StripSpec, x: &[i64]) -> usize {
    let s: i64 = spec.u.iter().zip(x).map(|(a, b)| a * b).sum();
    let r = s.rem_euclid(spec.strip_period());
    spec.radii.partition_point(|&b| b <= r) - 1
}

#[derive(Debug, Clone, Serialize)]
pub struct StripBuildReport {
    pub spec: StripSpec,
    pub environment: PeriodicEnvironment,
    /// `f_l = sum_e sigma_l(e) <e, u>^2` for the vectors the widths were
    /// derived from.
    pub variances: Vec<f64>,
    pub targets: Option<Vec<f64>>,
    pub widths: Vec<i64>,
    pub warnings: Vec<String>,
}

/// The periodic environment with period `(r_j, ..., r_j)` whose value at
/// `x` is `sigmas[strip_index(x)]`. Exact because `<x + r_j e_i, u>` and
/// `<x, u>` agree mod `r_j` for integer `u`.
pub fn build_strip_environment(spec: &StripSpec) -> Result<StripBuildReport> {
    build_with_eta(spec, DEFAULT_ETA)
}

pub fn build_with_eta(spec: &StripSpec, eta: f64) -> Result<StripBuildReport> {
    let d = spec.dim();
    let r = spec.strip_period() as usize;
    let period = vec![r; d];
    let volume = r.checked_pow(d as u32).filter(|&v| v <= 50_000_000).ok_or_else(|| {
        Error::ResourceCap(format!("strip period {r} in dimension {d} gives too many cells"))
    })?;
    let mut cells = Vec::with_capacity(volume);
    let mut x = vec![0i64; d];
    for _ in 0..volume {
        cells.push(strip_index(spec, &x));
        for v in x.iter_mut() {
            *v += 1;
            if *v < r as i64 {
                break;
            }
            *v = 0;
        }
    }
    let environment = PeriodicEnvironment::from_palette(period, spec.sigmas.clone(), cells)?;
    let mut warnings = Vec::new();
    if spec.orth_residual > eta {
        warnings.push(format!(
            "orthogonality residual {:.3e} exceeds eta = {eta:.1e}",
            spec.orth_residual
        ));
    }
    Ok(StripBuildReport {
        variances: spec.sigmas.iter().map(|s| effective_variance(s, &spec.u)).collect(),
        environment,
        targets: None,
        widths: spec.widths(),
        spec: spec.clone(),
        warnings,
    })
}

/// `sum_e sigma(e) <e, u>^2`.
pub fn effective_variance(sigma: &ProbVec, u: &[i64]) -> f64 {
    (0..2 * sigma.dim())
        .map(|k| {
            let e = step_vector(sigma.dim(), k);
            let p: i64 = e.iter().zip(u).map(|(a, b)| a * b).sum();
            sigma.get(k) * (p * p) as f64
        })
        .sum()
}

/// Radii with widths `floor(M lambda_l f_l)`. A relative slack of 1e-9
/// keeps exact products such as `20 * 0.5 * 0.5` from flooring down.
pub fn widths_for_frequencies(lambda: &[f64], sigmas: &[ProbVec], u: &[i64], m: f64) -> Result<Vec<i64>> {
    if lambda.len() != sigmas.len() {
        return Err(Error::invalid("one frequency per vector is required"));
    }
    let mut radii = vec![0i64];
    for (l, (lam, s)) in lambda.iter().zip(sigmas).enumerate() {
        let raw = m * lam * effective_variance(s, u);
        let w = (raw * (1.0 + 1e-9)).floor() as i64;
        if w < 1 {
            return Err(Error::invalid(format!("scale M = {m} gives strip {l} zero width; increase M")));
        }
        radii.push(radii.last().unwrap() + w);
    }
    Ok(radii)
}

/// Best rational approximation `p/q` with `q <= max_den`, by convergents.
pub fn rationalize(x: f64, max_den: i64) -> (i64, i64) {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i64;
        let k2 = ai.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            break;
        }
        let h2 = ai * h1 + h0;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    (h1, k1)
}

/// A primitive integer vector close in direction to `v`.
pub fn integer_direction(v: &[f64], max_den: i64) -> Result<Vec<i64>> {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(scale > 0.0) {
        return Err(Error::invalid("cannot rationalise the zero vector"));
    }
    let fracs: Vec<(i64, i64)> = v.iter().map(|x| rationalize(x / scale, max_den)).collect();
    let lcm = fracs.iter().fold(1i64, |l, &(_, q)| l / gcd(l, q) * q);
    let mut u: Vec<i64> = fracs.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let g = u.iter().fold(0, |g, &a| gcd(g, a));
    u.iter_mut().for_each(|a| *a /= g);
    if let Some(first) = u.iter().find(|&&a| a != 0) {
        if *first < 0 {
            u.iter_mut().for_each(|a| *a = -*a);
        }
    }
    Ok(u)
}

/// A unit vector orthogonal (in the least-squares sense) to every row.
pub fn orthogonal_direction(drifts: &[Vec<f64>], dim: usize) -> Vec<f64> {
    if drifts.iter().all(|d| d.iter().all(|x| x.abs() < 1e-12)) {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return e;
    }
    // pad to at least `dim` rows so the SVD exposes the full right basis
    let rows = drifts.len().max(dim);
    let a = DMatrix::from_fn(rows, dim, |i, j| if i < drifts.len() { drifts[i][j] } else { 0.0 });
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let k = (0..dim).min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b])).unwrap();
    vt.row(k).iter().copied().collect()
}

/// The strip environment's tilted operator folded onto the ring
/// `Z / r_j` through `x -> <x, u> mod r_j`. A positive eigenvector on the
/// ring lifts to one on the torus, so both share their Perron root.
pub fn strip_quotient_operator(spec: &StripSpec, theta: &[f64]) -> Result<TorusOperator> {
    let d = spec.dim();
    let r = spec.strip_period();
    let steps = 2 * d;
    let mut neighbors = Vec::with_capacity(r as usize * steps);
    let mut weights = Vec::with_capacity(r as usize * steps);
    let tilts: Vec<f64> = (0..steps).map(|k| step_dot(theta, k).exp()).collect();
    for s in 0..r {
        let sigma = &spec.sigmas[spec.radii.partition_point(|&b| b <= s) - 1];
        for k in 0..steps {
            let jump: i64 = step_vector(d, k).iter().zip(&spec.u).map(|(a, b)| a * b).sum();
            neighbors.push((s + jump).rem_euclid(r) as usize);
            weights.push(tilts[k] * sigma.get(k));
        }
    }
    let parity = (r % 2 == 0 && spec.u.iter().all(|a| a % 2 != 0)).then(|| (0..r).map(|s| (s % 2) as u8).collect());
    TorusOperator::from_transitions(theta.to_vec(), steps, neighbors, weights, parity)
}

/// Rate at the origin of the strip environment and the minimising tilt,
/// computed on the quotient ring.
pub fn strip_rate0(spec: &StripSpec, tol: f64) -> Result<(f64, Vec<f64>)> {
    let r = spec.strip_period() as f64;
    let weights: Vec<f64> = spec.widths().iter().map(|&w| w as f64 / r).collect();
    let (_, start) = averaged_minimizer(&spec.sigmas, &weights, 1e-10)?;
    let zero = vec![0.0; spec.dim()];
    let (value, theta, _) =
        minimise_operator_legendre(&|th: &[f64]| strip_quotient_operator(spec, th), &start, &zero, tol)?;
    Ok(((-value).max(0.0), theta))
}

/// Picks a primitive integer direction nearly orthogonal to every drift:
/// the smallest one (by entry size, at most `max_height`, denominators at
/// most `max_den`) with residual at most `eta`, else the most accurate
/// candidate within those bounds.
pub fn choose_direction(drifts: &[Vec<f64>], dim: usize, eta: f64, max_den: i64, max_height: i64) -> Result<(Vec<i64>, f64)> {
    let v = orthogonal_direction(drifts, dim);
    let mut best: Option<(Vec<i64>, f64)> = None;
    let mut den = 1i64;
    loop {
        let u = integer_direction(&v, den)?;
        if u.iter().map(|a| a.abs()).max().unwrap_or(0) > max_height {
            break;
        }
        let res = orthogonality_residual(drifts, &u);
        if res <= eta {
            return Ok((u, res));
        }
        if best.as_ref().map_or(true, |b| res < b.1) {
            best = Some((u, res));
        }
        if den >= max_den {
            break;
        }
        den = (den * 2).min(max_den);
    }
    best.ok_or_else(|| Error::invalid("no integer direction within the height bound"))
}

/// Which vectors the strip widths are tuned against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSource {
    /// The tilted vectors, whose walk has no drift along `u`.
    Tilted,
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineOptions {
    pub epsilon: f64,
    /// First scale tried; defaults to the smallest scale of at least 20
    /// giving every strip positive width.
    pub m_start: Option<f64>,
    pub m_cap: f64,
    pub growth: f64,
    pub tol: f64,
    pub eta: f64,
    pub max_denominator: i64,
    /// Largest entry allowed in the integer direction `u`; the strip
    /// period grows like `|u|^2`.
    pub max_height: i64,
    pub variance_from: VarianceSource,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            m_start: None,
            m_cap: 200.0,
            growth: 2.0,
            tol: 1e-8,
            eta: DEFAULT_ETA,
            max_denominator: 10_000,
            max_height: 16,
            variance_from: VarianceSource::Tilted,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineAttempt {
    pub m: f64,
    pub widths: Vec<i64>,
    pub rate0: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub i0: f64,
    pub t_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    /// Indices of the atoms carrying positive saddle weight, in strip order.
    pub support: Vec<usize>,
    pub tilted: Vec<ProbVec>,
    pub tilted_drift_balance: Vec<f64>,
    /// Best attempt (the first certified one, else the smallest gap).
    pub strip: StripBuildReport,
    /// Same geometry carrying the tilted vectors.
    pub tilted_strip: StripBuildReport,
    pub m: f64,
    pub rate0: f64,
    pub gap: f64,
    pub certified: bool,
    pub attempts: Vec<PipelineAttempt>,
}

/// Builds a strip environment from the support of a non-nestling or
/// marginally nestling law whose rate at the origin is within `epsilon`
/// of the law's `I(0)`, growing the scale `M` geometrically up to the cap.
pub fn optimal_strip_pipeline(law: &EnvironmentLaw, opts: &PipelineOptions) -> Result<PipelineReport> {
    let class = classify_law(law)?;
    if class.class == Nestling::Nestling {
        return Err(Error::invalid(format!(
            "law is {} ({}); the strip construction needs a non-nestling or marginally nestling law",
            class.class, class.convention
        )));
    }
    let rep = variational_i0(law, opts.tol)?;
    let d = law.dim();
    let support: Vec<usize> = (0..law.atoms().len()).filter(|&i| rep.t_star[i] > 0.0).collect();
    let sigmas: Vec<ProbVec> = support.iter().map(|&i| law.atoms()[i].clone()).collect();
    let total: f64 = support.iter().map(|&i| rep.t_star[i]).sum();
    let lambda: Vec<f64> = support.iter().map(|&i| rep.t_star[i] / total).collect();
    let tilted: Vec<ProbVec> = sigmas.iter().map(|s| tilt(s, &rep.theta_star)).collect();
    let tilted_drifts: Vec<Vec<f64>> = tilted.iter().map(ProbVec::drift).collect();
    let mut balance = vec![0.0; d];
    for (l, dr) in lambda.iter().zip(&tilted_drifts) {
        for (b, x) in balance.iter_mut().zip(dr) {
            *b += l * x;
        }
    }
    let (u, residual) = choose_direction(&tilted_drifts, d, opts.eta, opts.max_denominator, opts.max_height)?;
    let width_sigmas = match opts.variance_from {
        VarianceSource::Tilted => &tilted,
        VarianceSource::Original => &sigmas,
    };
    let min_m = lambda
        .iter()
        .zip(width_sigmas)
        .map(|(l, s)| 1.0 / (l * effective_variance(s, &u)))
        .fold(0.0, f64::max)
        .ceil();
    let mut m = opts.m_start.unwrap_or(20.0f64.max(min_m));
    let mut attempts = Vec::new();
    let mut best: Option<(StripBuildReport, f64, f64, f64)> = None;
    loop {
        let radii = widths_for_frequencies(&lambda, width_sigmas, &u, m)?;
        let spec = StripSpec::new(u.clone(), radii, sigmas.clone())?.with_orth_residual(residual);
        let rate0 = strip_rate0(&spec, opts.tol)?.0;
        let mut built = build_with_eta(&spec, opts.eta)?;
        built.targets = Some(lambda.clone());
        built.variances = width_sigmas.iter().map(|s| effective_variance(s, &u)).collect();
        let gap = (rate0 - rep.i0).abs();
        attempts.push(PipelineAttempt { m, widths: built.widths.clone(), rate0, gap });
        if best.as_ref().map_or(true, |b| gap < b.3) {
            best = Some((built, m, rate0, gap));
        }
        if gap <= opts.epsilon || m >= opts.m_cap {
            break;
        }
        m = (m * opts.growth).min(opts.m_cap);
    }
    let (strip, m, rate0, gap) = best.unwrap();
    let tilted_spec = strip.spec.with_sigmas(tilted.clone())?;
    let mut tilted_strip = build_with_eta(&tilted_spec, opts.eta)?;
    tilted_strip.targets = Some(lambda.clone());
    tilted_strip.variances = strip.variances.clone();
    Ok(PipelineReport {
        i0: rep.i0,
        t_star: rep.t_star,
        theta_star: rep.theta_star,
        support,
        tilted,
        tilted_drift_balance: balance,
        strip,
        tilted_strip,
        m,
        rate0,
        gap,
        certified: gap <= opts.epsilon,
        attempts,
    })
}
