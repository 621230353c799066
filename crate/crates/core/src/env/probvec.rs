use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `sum p(e) = 1`.
pub const SUM_TOL: f64 = 1e-12;

/// Axis and sign of step `k` in the `+e_1, -e_1, ..., +e_d, -e_d` order.
#[inline]
pub fn step_axis_sign(k: usize) -> (usize, i64) {
    (k / 2, if k % 2 == 0 { 1 } else { -1 })
}

/// Index of the step opposite to `k`.
#[inline]
pub fn opposite(k: usize) -> usize {
    k ^ 1
}

/// The lattice vector of step `k` in dimension `dim`.
pub fn step_vector(dim: usize, k: usize) -> Vec<i64> {
    let (axis, sign) = step_axis_sign(k);
    let mut v = vec![0; dim];
    v[axis] = sign;
    v
}

/// `<theta, e_k>` without materialising the step vector.
#[inline]
pub fn step_dot(theta: &[f64], k: usize) -> f64 {
    let (axis, sign) = step_axis_sign(k);
    sign as f64 * theta[axis]
}

/// A jump law on the `2d` nearest-neighbour steps of `Z^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVec {
    probs: Vec<f64>,
}

impl ProbVec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.len() % 2 != 0 {
            return Err(Error::invalid(format!(
                "probability vector needs an even, nonzero number of entries (got {})",
                probs.len()
            )));
        }
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::invalid(format!("entry {k} is {p}, expected a value in [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!(
                "entries sum to {sum:.17}, expected 1 within {SUM_TOL:e}"
            )));
        }
        Ok(Self { probs })
    }

    /// Builds a vector and additionally checks `p(e) >= kappa` for every step.
    pub fn with_kappa(probs: Vec<f64>, kappa: f64) -> Result<Self> {
        let p = Self::new(probs)?;
        if !p.is_elliptic(kappa) {
            return Err(Error::invalid(format!(
                "minimum entry {} is below the ellipticity constant {kappa}",
                p.min_entry()
            )));
        }
        Ok(p)
    }

    /// Normalises nonnegative weights into a probability vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid("weights must have a positive finite sum"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// The simple symmetric walk in dimension `dim`.
    pub fn symmetric(dim: usize) -> Self {
        let n = 2 * dim;
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn dim(&self) -> usize {
        self.probs.len() / 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probs[k]
    }

    pub fn min_entry(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_elliptic(&self, kappa: f64) -> bool {
        // One ulp of slack so that a declared kappa equal to an entry passes.
        self.min_entry() >= kappa * (1.0 - 4.0 * f64::EPSILON)
    }

    pub fn is_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    pub fn drift(&self) -> Vec<f64> {
        drift(self)
    }

    /// `max_e |p(e) - q(e)|`.
    pub fn sup_distance(&self, other: &ProbVec) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for ProbVec {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVec::new(v)
    }
}

impl From<ProbVec> for Vec<f64> {
    fn from(p: ProbVec) -> Vec<f64> {
        p.probs
    }
}

/// Mean step `sum_e p(e) e`.
pub fn drift(p: &ProbVec) -> Vec<f64> {
    let mut d = vec![0.0; p.dim()];
    for (axis, slot) in d.iter_mut().enumerate() {
        *slot = p.probs[2 * axis] - p.probs[2 * axis + 1];
    }
    d
}

/// Convex combination `sum_i t_i sigma_i`.
pub fn mix(t: &[f64], sigmas: &[ProbVec]) -> Result<ProbVec> {
    if t.len() != sigmas.len() || sigmas.is_empty() {
        return Err(Error::invalid(format!(
            "mixture weights ({}) and vectors ({}) must match and be nonempty",
            t.len(),
            sigmas.len()
        )));
    }
    let dim = sigmas[0].dim();
    if sigmas.iter().any(|s| s.dim() != dim) {
        return Err(Error::invalid("all mixed vectors must share a dimension"));
    }
    if t.iter().any(|&w| !w.is_finite() || w < -SUM_TOL) {
        return Err(Error::invalid("mixture weights must be nonnegative"));
    }
    let total: f64 = t.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(format!(
            "mixture weights sum to {total:.17}, expected 1"
        )));
    }
    let mut probs = vec![0.0; 2 * dim];
    for (&w, s) in t.iter().zip(sigmas) {
        let w = w.max(0.0);
        for (acc, p) in probs.iter_mut().zip(&s.probs) {
            *acc += w * p;
        }
    }
    // Inputs are within SUM_TOL of the simplex; absorb the rounding so the
    // result passes validation.
    let s: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= s;
    }
    ProbVec::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbVec {
        ProbVec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift(&ProbVec::symmetric(2)), vec![0.0, 0.0]);
        assert_abs_diff_eq!(drift(&pv(&[0.8, 0.2]))[0], 0.6, epsilon = 1e-15);

        // Brute force: sum p(e) * e over explicit step vectors.
        let p = pv(&[0.4, 0.1, 0.3, 0.2]);
        let mut brute = [0.0; 2];
        for k in 0..4 {
            let e = step_vector(2, k);
            for a in 0..2 {
                brute[a] += p.get(k) * e[a] as f64;
            }
        }
        let d = drift(&p);
        assert_abs_diff_eq!(d[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d[0], brute[0], epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], brute[1], epsilon = 1e-15);
    }

    #[test]
    fn mix_examples() {
        let s1 = pv(&[0.9, 0.1]);
        let s2 = pv(&[0.4, 0.6]);
        assert_eq!(mix(&[1.0, 0.0], &[s1.clone(), s2.clone()]).unwrap(), s1);
        let m = mix(&[0.2, 0.8], &[s1.clone(), s2]).unwrap();
        assert_abs_diff_eq!(m.get(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1), 0.5, epsilon = 1e-15);
        assert_eq!(mix(&[0.5, 0.5], &[s1.clone(), s1.clone()]).unwrap(), s1);
    }

    #[test]
    fn mix_rejects_points_off_the_simplex() {
        let s = pv(&[0.5, 0.5]);
        assert!(mix(&[0.7, 0.7], &[s.clone(), s.clone()]).is_err());
        assert!(mix(&[1.5, -0.5], &[s.clone(), s]).is_err());
    }

    #[test]
    fn validation() {
        assert!(ProbVec::new(vec![0.5, 0.4]).is_err());
        assert!(ProbVec::new(vec![1.2, -0.2]).is_err());
        assert!(ProbVec::new(vec![1.0]).is_err());
        assert!(ProbVec::with_kappa(vec![0.95, 0.05], 0.1).is_err());
        assert!(ProbVec::with_kappa(vec![0.9, 0.1], 0.1).is_ok());
        let json = serde_json::to_string(&pv(&[0.25, 0.75])).unwrap();
        assert_eq!(json, "[0.25,0.75]");
        assert!(serde_json::from_str::<ProbVec>("[0.3,0.3]").is_err());
    }
}
