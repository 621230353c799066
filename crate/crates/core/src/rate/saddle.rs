use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::mgf::{log_mgf, log_mgf_derivatives, minimizer_theta};
use crate::env::{mix, ProbVec};
use crate::error::{Error, Result};
use crate::optimize::{newton_minimize, NewtonOptions, Objective};

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub t_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    /// `Lambda(t*, theta*)`.
    pub value: f64,
    /// `R_1(theta*) - R_2(t*)`, a certified bound on the distance of
    /// `value` from the true saddle value.
    pub gap: f64,
    pub upper: f64,
    pub lower: f64,
    pub iterations: usize,
}

/// `R_1(theta) = max_i Lambda_i(theta)`.
pub fn r1(sigmas: &[ProbVec], theta: &[f64]) -> f64 {
    sigmas.iter().map(|s| log_mgf(s, theta)).fold(f64::NEG_INFINITY, f64::max)
}

/// `R_2(t) = inf_theta Lambda(t, theta) = log sum_e sqrt(m(e) m(-e))` with
/// `m = mix(t, sigmas)`.
pub fn r2(sigmas: &[ProbVec], t: &[f64]) -> Result<f64> {
    let m = mix(t, sigmas)?;
    let s: f64 = (0..m.dim()).map(|a| 2.0 * (m.get(2 * a) * m.get(2 * a + 1)).sqrt()).sum();
    Ok(s.ln())
}

/// `Lambda(t, theta) = log sum_i t_i exp(Lambda_i(theta))`.
pub fn saddle_objective(sigmas: &[ProbVec], t: &[f64], theta: &[f64]) -> f64 {
    let lams: Vec<f64> = sigmas.iter().map(|s| log_mgf(s, theta)).collect();
    let top = lams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = t.iter().zip(&lams).map(|(ti, l)| ti * (l - top).exp()).sum();
    top + s.ln()
}

/// `(1/beta) log sum_i exp(beta Lambda_i(theta))`, a smooth upper
/// approximation of `R_1` within `log(j)/beta`.
struct SmoothedMax<'a> {
    sigmas: &'a [ProbVec],
    beta: f64,
}

impl SmoothedMax<'_> {
    fn weights(&self, lams: &[f64]) -> (f64, Vec<f64>) {
        let top = lams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lams.iter().map(|l| (self.beta * (l - top)).exp()).collect();
        let z: f64 = w.iter().sum();
        (top + z.ln() / self.beta, w.into_iter().map(|x| x / z).collect())
    }
}

impl Objective for SmoothedMax<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        let lams: Vec<f64> = self.sigmas.iter().map(|s| log_mgf(s, x)).collect();
        self.weights(&lams).0
    }

    fn derivatives(&mut self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let parts: Vec<_> = self.sigmas.iter().map(|s| log_mgf_derivatives(s, x)).collect();
        let lams: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let (value, w) = self.weights(&lams);
        let d = x.len();
        let mut g = DVector::zeros(d);
        let mut h = DMatrix::zeros(d, d);
        for (wi, (_, gi, hi)) in w.iter().zip(&parts) {
            g += gi * *wi;
            h += hi * *wi + gi * gi.transpose() * (*wi * self.beta);
        }
        h -= &g * g.transpose() * self.beta;
        (value, g, h)
    }
}

/// Centering for the barrier `v/mu - sum_i log(v - Lambda_i(theta))` of
/// the epigraph problem `min v` s.t. `Lambda_i(theta) <= v`. Returns the
/// Newton iterations used.
fn center(sigmas: &[ProbVec], theta: &mut [f64], v: &mut f64, mu: f64) -> usize {
    let d = theta.len();
    let slacks = |th: &[f64], v: f64| -> Vec<f64> { sigmas.iter().map(|s| v - log_mgf(s, th)).collect() };
    for iter in 0..100 {
        let parts: Vec<_> = sigmas.iter().map(|s| log_mgf_derivatives(s, theta)).collect();
        let mut g = DVector::zeros(d + 1);
        let mut h = DMatrix::zeros(d + 1, d + 1);
        g[d] = 1.0 / mu;
        for (lam, gl, hl) in &parts {
            let s = *v - lam;
            let mut a = DVector::zeros(d + 1);
            a.rows_mut(0, d).copy_from(&(-gl));
            a[d] = 1.0;
            g -= &a / s;
            h += &a * a.transpose() / (s * s);
            let mut block = h.view_mut((0, 0), (d, d));
            block += hl / s;
        }
        let step = match h.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => match h.lu().solve(&(-&g)) {
                Some(s) => s,
                None => return iter,
            },
        };
        let decrement = -g.dot(&step);
        if !(decrement > 1e-20) {
            return iter;
        }
        let mut alpha = if decrement.sqrt() > 0.25 { 1.0 / (1.0 + decrement.sqrt()) } else { 1.0 };
        loop {
            let th: Vec<f64> = (0..d).map(|k| theta[k] + alpha * step[k]).collect();
            let nv = *v + alpha * step[d];
            if slacks(&th, nv).iter().all(|&s| s > 0.0) {
                theta.copy_from_slice(&th);
                *v = nv;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                return iter;
            }
        }
    }
    100
}

/// Newton's method on the optimality system restricted to an active set
/// `A`: `Lambda_i(theta) = v` for `i` in `A`, `sum_A t_i grad Lambda_i = 0`,
/// `sum_A t_i = 1`. Least-squares steps cope with redundant active sets.
/// Indices whose weight turns negative are dropped and the solve repeated.
fn kkt_polish(sigmas: &[ProbVec], theta0: &[f64], t0: &[f64], v0: f64) -> Option<(Vec<f64>, Vec<f64>, usize)> {
    let d = theta0.len();
    let mut active: Vec<usize> = (0..sigmas.len()).filter(|&i| t0[i] > 0.0).collect();
    let mut total_iters = 0;
    for _round in 0..sigmas.len() {
        let a = active.len();
        if a == 0 {
            return None;
        }
        let mut theta = theta0.to_vec();
        let mut t: Vec<f64> = active.iter().map(|&i| t0[i]).collect();
        let norm: f64 = t.iter().sum();
        t.iter_mut().for_each(|x| *x /= norm);
        let mut v = v0;
        for _ in 0..50 {
            total_iters += 1;
            let parts: Vec<_> = active.iter().map(|&i| log_mgf_derivatives(&sigmas[i], &theta)).collect();
            let n = d + a + 1;
            let mut f = DVector::zeros(n);
            let mut jac = DMatrix::zeros(n, n);
            let mut weighted_hess = DMatrix::zeros(d, d);
            for (r, (lam, g, h)) in parts.iter().enumerate() {
                f[r] = lam - v;
                for k in 0..d {
                    jac[(r, k)] = g[k];
                    jac[(a + k, d + r)] = g[k];
                    f[a + k] += t[r] * g[k];
                }
                jac[(r, d + a)] = -1.0;
                weighted_hess += h * t[r];
            }
            jac.view_mut((a, 0), (d, d)).copy_from(&weighted_hess);
            for r in 0..a {
                jac[(a + d, d + r)] = 1.0;
            }
            f[a + d] = t.iter().sum::<f64>() - 1.0;
            let resid = f.amax();
            if resid < 1e-15 {
                break;
            }
            let step = match jac.svd(true, true).solve(&(-&f), 1e-13) {
                Ok(s) => s,
                Err(_) => return None,
            };
            for k in 0..d {
                theta[k] += step[k];
            }
            for r in 0..a {
                t[r] += step[d + r];
            }
            v += step[d + a];
            if step.amax() < 1e-16 {
                break;
            }
        }
        if theta.iter().chain(&t).any(|x| !x.is_finite()) {
            return None;
        }
        if let Some(worst) = (0..a).filter(|&r| t[r] < 0.0).min_by(|&x, &y| t[x].total_cmp(&t[y])) {
            active.remove(worst);
            continue;
        }
        let mut full = vec![0.0; sigmas.len()];
        for (r, &i) in active.iter().enumerate() {
            full[i] = t[r];
        }
        let sum: f64 = full.iter().sum();
        full.iter_mut().for_each(|x| *x /= sum);
        return Some((theta, full, total_iters));
    }
    None
}

fn validate(sigmas: &[ProbVec]) -> Result<usize> {
    let first = sigmas.first().ok_or_else(|| Error::invalid("saddle needs at least one vector"))?;
    let d = first.dim();
    if sigmas.iter().any(|s| s.dim() != d) {
        return Err(Error::invalid("all vectors must share a dimension"));
    }
    for s in sigmas {
        if let Some(index) = s.as_slice().iter().position(|&p| p <= 0.0) {
            return Err(Error::Degenerate { index });
        }
    }
    Ok(d)
}

fn certificate(sigmas: &[ProbVec], theta: &[f64], t: Vec<f64>, iterations: usize) -> Result<SaddlePoint> {
    let upper = r1(sigmas, theta);
    let lower = r2(sigmas, &t)?;
    let value = saddle_objective(sigmas, &t, theta);
    let value = if lower <= upper { value.clamp(lower, upper) } else { 0.5 * (lower + upper) };
    Ok(SaddlePoint {
        value,
        t_star: t,
        theta_star: theta.to_vec(),
        gap: upper - lower,
        upper,
        lower,
        iterations,
    })
}

/// Solves `min_theta max_t Lambda(t, theta) = max_t min_theta Lambda(t, theta)`
/// over `t` in the simplex, returning a point whose duality gap is at most
/// `tol`.
///
/// A smoothed maximum with increasing temperature gives the starting
/// `theta`; a log-barrier path on the epigraph problem then drives the gap
/// down, its multipliers supplying `t`. Weights of vectors whose `Lambda_i`
/// falls more than `tol` below the maximum are set to zero.
pub fn solve_saddle(sigmas: &[ProbVec], tol: f64) -> Result<SaddlePoint> {
    let d = validate(sigmas)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let j = sigmas.len();
    let bary = vec![1.0 / j as f64; j];
    let mut theta = minimizer_theta(&mix(&bary, sigmas)?)?;
    let mut iterations = 0;

    let mut beta = 8.0;
    while beta <= 4096.0 {
        let mut opts = NewtonOptions::new("smoothed saddle descent", 1e-10);
        opts.stall_tol = 1e-6;
        if let Ok(m) = newton_minimize(&mut SmoothedMax { sigmas, beta }, &theta, &opts) {
            theta = m.x;
            iterations += m.iterations;
        }
        beta *= 2.0;
    }

    let mut mu = 1e-3;
    let mut v = r1(sigmas, &theta) + mu * j as f64;
    let mu_floor = 1e-11;
    let mut best: Option<SaddlePoint> = None;
    loop {
        iterations += center(sigmas, &mut theta, &mut v, mu);
        let lams: Vec<f64> = sigmas.iter().map(|s| log_mgf(s, &theta)).collect();
        let raw: Vec<f64> = lams.iter().map(|l| mu / (v - l)).collect();
        let top = lams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let snapped: Vec<f64> = raw.iter().zip(&lams).map(|(&t, &l)| if top - l > tol { 0.0 } else { t }).collect();
        let total: f64 = snapped.iter().sum();
        let t: Vec<f64> = snapped.iter().map(|x| x / total).collect();
        let mut cand = certificate(sigmas, &theta, t.clone(), iterations)?;
        let alt_theta = minimizer_theta(&mix(&t, sigmas)?)?;
        if r1(sigmas, &alt_theta) < cand.upper {
            let alt = certificate(sigmas, &alt_theta, t, iterations)?;
            if alt.theta_star.len() == d && alt.gap < cand.gap {
                let active_ok = alt
                    .t_star
                    .iter()
                    .zip(sigmas)
                    .all(|(&ti, s)| ti == 0.0 || alt.upper - log_mgf(s, &alt_theta) <= tol);
                if active_ok {
                    cand = alt;
                }
            }
        }
        // Later points on the path have more accurate multipliers.
        if best.as_ref().map_or(true, |b| cand.gap <= tol || cand.gap < b.gap) {
            best = Some(cand);
        }
        if mu <= mu_floor {
            break;
        }
        mu = (mu * 0.1).max(mu_floor);
    }
    let mut best = best.unwrap();
    if let Some((th, t, it)) = kkt_polish(sigmas, &theta, &best.t_star, v) {
        let polished = certificate(sigmas, &th, t, iterations + it)?;
        let balanced = polished
            .t_star
            .iter()
            .zip(sigmas)
            .all(|(&ti, s)| ti == 0.0 || polished.upper - log_mgf(s, &th) <= tol);
        if balanced && (polished.gap <= tol || polished.gap < best.gap) {
            best = polished;
        }
    }
    if best.gap <= tol {
        Ok(best)
    } else {
        Err(Error::SaddleNonConvergence { best: Box::new(best) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::mgf::rate_at_zero_closed;
    use approx::assert_abs_diff_eq;

    fn pv(p: &[f64]) -> ProbVec {
        ProbVec::new(p.to_vec()).unwrap()
    }

    #[test]
    fn single_vector_is_its_own_rate() {
        let s = pv(&[0.4, 0.1, 0.3, 0.2]);
        let sp = solve_saddle(&[s.clone()], 1e-8).unwrap();
        assert_eq!(sp.t_star, vec![1.0]);
        assert_abs_diff_eq!(sp.value, -rate_at_zero_closed(&s).unwrap(), epsilon = 1e-8);
        let th = minimizer_theta(&s).unwrap();
        for (a, b) in sp.theta_star.iter().zip(&th) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-5);
        }
    }

    #[test]
    fn zero_drift_mixture_in_one_dimension() {
        let sp = solve_saddle(&[pv(&[0.9, 0.1]), pv(&[0.4, 0.6])], 1e-8).unwrap();
        assert_abs_diff_eq!(sp.t_star[0], 0.2, epsilon = 1e-6);
        assert_abs_diff_eq!(sp.theta_star[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sp.value, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn mirrored_pair_in_the_plane() {
        let sp = solve_saddle(&[pv(&[0.4, 0.1, 0.3, 0.2]), pv(&[0.1, 0.4, 0.3, 0.2])], 1e-8).unwrap();
        assert!(sp.gap <= 1e-8);
        assert_abs_diff_eq!(sp.t_star[0], 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(sp.value, -0.010153423432868017, epsilon = 1e-8);
        assert_abs_diff_eq!(sp.theta_star[0], 0.0, epsilon = 1e-4);
        assert_abs_diff_eq!(sp.theta_star[1], -0.20273255405408214, epsilon = 1e-4);
    }

    #[test]
    fn weak_duality_on_the_returned_point() {
        let sigmas = [pv(&[0.5, 0.1, 0.2, 0.2]), pv(&[0.2, 0.3, 0.35, 0.15]), pv(&[0.3, 0.2, 0.1, 0.4])];
        let sp = solve_saddle(&sigmas, 1e-7).unwrap();
        assert!(sp.lower <= sp.value && sp.value <= sp.upper);
        assert!(sp.gap >= -1e-12 && sp.gap <= 1e-7);
        for t in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]] {
            assert!(r2(&sigmas, &t).unwrap() <= sp.value + 1e-12);
        }
        for th in [[0.0, 0.0], [0.3, -0.2]] {
            assert!(r1(&sigmas, &th) >= sp.value - 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(solve_saddle(&[pv(&[1.0, 0.0])], 1e-6), Err(Error::Degenerate { .. })));
        assert!(solve_saddle(&[], 1e-6).is_err());
    }
}
