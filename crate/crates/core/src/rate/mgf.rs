use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::env::{step_dot, ProbVec};
use crate::error::{Error, Result};
use crate::optimize::{newton_minimize, NewtonOptions, Objective};

/// `log sum_e exp(<theta, e>) sigma(e)`, evaluated with log-sum-exp.
pub fn log_mgf(sigma: &ProbVec, theta: &[f64]) -> f64 {
    let probs = sigma.as_slice();
    let mut top = f64::NEG_INFINITY;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            top = top.max(step_dot(theta, k));
        }
    }
    let s: f64 = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| p * (step_dot(theta, k) - top).exp())
        .sum();
    top + s.ln()
}

/// Value, gradient and Hessian of [`log_mgf`] in `theta`. The gradient is
/// the drift of the tilted vector and the Hessian its step covariance.
pub fn log_mgf_derivatives(sigma: &ProbVec, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let value = log_mgf(sigma, theta);
    let d = sigma.dim();
    let mut g = DVector::zeros(d);
    let mut h = DMatrix::zeros(d, d);
    for a in 0..d {
        let wp = sigma.get(2 * a) * (theta[a] - value).exp();
        let wm = sigma.get(2 * a + 1) * (-theta[a] - value).exp();
        g[a] = wp - wm;
        h[(a, a)] = wp + wm;
    }
    h -= &g * g.transpose();
    (value, g, h)
}

fn first_zero(sigma: &ProbVec) -> Option<usize> {
    sigma.as_slice().iter().position(|&p| p <= 0.0)
}

/// `I_sigma(0) = -log sum_e sqrt(sigma(e) sigma(-e))`; refuses vectors
/// with a zero entry.
pub fn rate_at_zero_closed(sigma: &ProbVec) -> Result<f64> {
    if let Some(index) = first_zero(sigma) {
        return Err(Error::Degenerate { index });
    }
    let s: f64 = (0..sigma.dim()).map(|a| 2.0 * (sigma.get(2 * a) * sigma.get(2 * a + 1)).sqrt()).sum();
    Ok(-s.ln())
}

/// The unique minimiser of `log_mgf(sigma, .)`.
pub fn minimizer_theta(sigma: &ProbVec) -> Result<Vec<f64>> {
    if let Some(index) = first_zero(sigma) {
        return Err(Error::Degenerate { index });
    }
    Ok((0..sigma.dim()).map(|a| 0.5 * (sigma.get(2 * a + 1) / sigma.get(2 * a)).ln()).collect())
}

/// `sigma*(e) = exp(<theta, e> - log_mgf(sigma, theta)) sigma(e)`.
pub fn tilt(sigma: &ProbVec, theta: &[f64]) -> ProbVec {
    let lam = log_mgf(sigma, theta);
    let probs: Vec<f64> = sigma
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, &p)| if p > 0.0 { p * (step_dot(theta, k) - lam).exp() } else { 0.0 })
        .collect();
    ProbVec::from_weights(probs).expect("tilting preserves positivity of the mass")
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericRate {
    pub i0: f64,
    pub theta: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    /// False when some entry is zero; the infimum may then sit at infinity
    /// and `theta` is only where the descent stopped.
    pub elliptic: bool,
}

struct SingleMgf<'a>(&'a ProbVec);

impl Objective for SingleMgf<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        log_mgf(self.0, x)
    }

    fn derivatives(&mut self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        log_mgf_derivatives(self.0, x)
    }
}

/// Minimises `log_mgf` by damped Newton with a gradient stopping rule.
pub fn rate_at_zero_numeric_report(sigma: &ProbVec) -> Result<NumericRate> {
    let mut opts = NewtonOptions::new("rate at zero descent", 1e-10);
    opts.stall_tol = 1e-9;
    let m = newton_minimize(&mut SingleMgf(sigma), &vec![0.0; sigma.dim()], &opts)?;
    Ok(NumericRate {
        i0: -m.value,
        theta: m.x,
        grad_norm: m.grad_norm,
        iterations: m.iterations,
        elliptic: sigma.is_positive(),
    })
}

pub fn rate_at_zero_numeric(sigma: &ProbVec) -> Result<f64> {
    rate_at_zero_numeric_report(sigma).map(|r| r.i0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(p: &[f64]) -> ProbVec {
        ProbVec::new(p.to_vec()).unwrap()
    }

    #[test]
    fn mgf_examples() {
        assert_eq!(log_mgf(&pv(&[0.4, 0.1, 0.3, 0.2]), &[0.0, 0.0]), 0.0);
        let s = pv(&[0.5, 0.5]);
        for t in [0.5f64, 1.0, 2.0] {
            assert_abs_diff_eq!(log_mgf(&s, &[t]), t.cosh().ln(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(log_mgf(&pv(&[0.8, 0.2]), &[-0.6931472]), -0.22314355131420943, epsilon = 1e-7);
        // large tilts must not overflow
        assert_abs_diff_eq!(log_mgf(&s, &[800.0]), 800.0 + 0.5f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(rate_at_zero_closed(&pv(&[0.3, 0.3, 0.2, 0.2])).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rate_at_zero_closed(&pv(&[0.8, 0.2])).unwrap(), 0.2231435513142097, epsilon = 1e-14);
        assert_abs_diff_eq!(
            rate_at_zero_closed(&pv(&[0.4, 0.1, 0.3, 0.2])).unwrap(),
            0.11664848737353888,
            epsilon = 1e-14
        );
        assert!(matches!(rate_at_zero_closed(&pv(&[1.0, 0.0])), Err(Error::Degenerate { index: 1 })));
    }

    #[test]
    fn minimizer_examples() {
        assert_eq!(minimizer_theta(&pv(&[0.25; 4])).unwrap(), vec![0.0, 0.0]);
        let th = minimizer_theta(&pv(&[0.4, 0.1, 0.3, 0.2])).unwrap();
        assert_abs_diff_eq!(th[0], -0.6931471805599453, epsilon = 1e-14);
        assert_abs_diff_eq!(th[1], -0.20273255405408214, epsilon = 1e-14);
        let s = pv(&[0.4, 0.1, 0.3, 0.2]);
        assert_abs_diff_eq!(log_mgf(&s, &th), -rate_at_zero_closed(&s).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn numeric_matches_closed() {
        for p in [[0.8, 0.2], [0.5, 0.5], [0.93, 0.07]] {
            let s = pv(&p);
            assert_abs_diff_eq!(rate_at_zero_numeric(&s).unwrap(), rate_at_zero_closed(&s).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn numeric_handles_zero_entries() {
        // With a one-sided axis the infimum is approached at infinity.
        let r = rate_at_zero_numeric_report(&pv(&[0.5, 0.0, 0.25, 0.25])).unwrap();
        assert!(!r.elliptic);
        assert_abs_diff_eq!(r.i0, -(0.5f64).ln(), epsilon = 1e-8);
    }

    #[test]
    fn tilt_examples() {
        let s = pv(&[0.8, 0.2]);
        assert_eq!(tilt(&s, &[0.0]), s);
        let t = tilt(&s, &minimizer_theta(&s).unwrap());
        assert_abs_diff_eq!(t.get(0), 0.5, epsilon = 1e-15);
        let s = pv(&[0.4, 0.1, 0.3, 0.2]);
        let d = tilt(&s, &minimizer_theta(&s).unwrap()).drift();
        assert!(d.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = pv(&[0.4, 0.1, 0.3, 0.2]);
        let th = [0.3, -0.7];
        let (_, g, h) = log_mgf_derivatives(&s, &th);
        let eps = 1e-6;
        for a in 0..2 {
            let mut up = th;
            let mut dn = th;
            up[a] += eps;
            dn[a] -= eps;
            assert_abs_diff_eq!((log_mgf(&s, &up) - log_mgf(&s, &dn)) / (2.0 * eps), g[a], epsilon = 1e-8);
            let (_, gu, _) = log_mgf_derivatives(&s, &up);
            let (_, gd, _) = log_mgf_derivatives(&s, &dn);
            for b in 0..2 {
                assert_abs_diff_eq!((gu[b] - gd[b]) / (2.0 * eps), h[(a, b)], epsilon = 1e-7);
            }
        }
    }
}
