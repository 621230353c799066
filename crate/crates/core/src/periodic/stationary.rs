use nalgebra::{DMatrix, DVector};

use super::torus::TorusOperator;
use crate::env::PeriodicEnvironment;
use crate::error::{Error, Result};

/// Stationary law of the walk folded onto the period torus, one mass per
/// cell of the period box.
///
/// Power iteration on the two-step kernel keeps each parity class's mass
/// fixed, so starting from the uniform law it converges even on bipartite
/// tori; the result is averaged with its one-step image. Slow cases on
/// moderate tori fall back to a direct linear solve.
pub fn invariant_measure(env: &PeriodicEnvironment) -> Result<Vec<f64>> {
    let op = TorusOperator::new(env, &vec![0.0; env.period().len()])?;
    let n = op.num_cells();
    let mut mu = vec![1.0 / n as f64; n];
    let mut one = vec![0.0; n];
    let mut two = vec![0.0; n];
    let budget = (20_000_000 / (n * 2 * env.period().len())).clamp(200, 100_000);
    for _ in 0..budget {
        op.apply_transpose(&mu, &mut one);
        op.apply_transpose(&one, &mut two);
        let change: f64 = two.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mu, &mut two);
        if change < 1e-14 {
            op.apply_transpose(&mu, &mut one);
            let avg: Vec<f64> = mu.iter().zip(&one).map(|(a, b)| 0.5 * (a + b)).collect();
            return Ok(renormalised(avg));
        }
    }
    if n <= 3000 {
        return direct_solve(&op);
    }
    Err(Error::NonConvergence { what: "stationary power iteration", iterations: budget, residual: f64::NAN })
}

fn renormalised(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn direct_solve(op: &TorusOperator) -> Result<Vec<f64>> {
    let n = op.num_cells();
    let p = op.to_dense();
    let mut a: DMatrix<f64> = p.transpose() - DMatrix::identity(n, n);
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let mu = a
        .lu()
        .solve(&b)
        .ok_or(Error::NonConvergence { what: "stationary linear solve", iterations: 1, residual: f64::NAN })?;
    Ok(renormalised(mu.iter().map(|x| x.max(0.0)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ProbVec;
    use approx::assert_abs_diff_eq;

    fn stationarity_residual(env: &PeriodicEnvironment, mu: &[f64]) -> f64 {
        let op = TorusOperator::new(env, &vec![0.0; env.period().len()]).unwrap();
        let mut out = vec![0.0; mu.len()];
        op.apply_transpose(mu, &mut out);
        out.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn period_one_is_a_point_mass() {
        let env = PeriodicEnvironment::homogeneous(ProbVec::symmetric(2)).unwrap();
        assert_eq!(invariant_measure(&env).unwrap(), vec![1.0]);
    }

    #[test]
    fn symmetric_pair_is_uniform() {
        let s = ProbVec::symmetric(1);
        let env = PeriodicEnvironment::from_palette(vec![2], vec![s], vec![0, 0]).unwrap();
        let mu = invariant_measure(&env).unwrap();
        assert_abs_diff_eq!(mu[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn alternating_pair_matches_balance_equations() {
        // On two cells every step swaps the cell, so mu = (1/2, 1/2).
        let a = ProbVec::new(vec![0.8, 0.2]).unwrap();
        let b = ProbVec::new(vec![0.3, 0.7]).unwrap();
        let env = PeriodicEnvironment::from_table(vec![2], vec![a.clone(), b.clone()]).unwrap();
        let mu = invariant_measure(&env).unwrap();
        assert_abs_diff_eq!(mu[0], 0.5, epsilon = 1e-12);
        // On three cells the balance equations are a 3x3 linear system.
        let env = PeriodicEnvironment::from_table(vec![3], vec![a.clone(), b.clone(), a]).unwrap();
        let mu = invariant_measure(&env).unwrap();
        assert!(stationarity_residual(&env, &mu) < 1e-10);
        let direct = direct_solve(&TorusOperator::new(&env, &[0.0]).unwrap()).unwrap();
        for (x, y) in mu.iter().zip(&direct) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }
}
