//! Damped Newton minimisation for small smooth convex problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Value, gradient and Hessian at `x`.
    fn derivatives(&mut self, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>);
}

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    /// Stop once the sup-norm of the gradient is at or below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// When the line search stalls, accept the iterate if the gradient is
    /// already below this (useful for finite-difference objectives).
    pub stall_tol: f64,
    pub what: &'static str,
}

impl NewtonOptions {
    pub fn new(what: &'static str, grad_tol: f64) -> Self {
        Self { grad_tol, max_iter: 200, stall_tol: grad_tol, what }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Newton direction, shifting the Hessian by a growing multiple of the
/// identity until it factors (Levenberg fallback).
fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> DVector<f64> {
    let n = g.len();
    let scale = h.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut shift = 0.0;
    loop {
        let m = h + DMatrix::identity(n, n) * shift;
        if let Some(ch) = m.cholesky() {
            let p = -ch.solve(g);
            if p.iter().all(|x| x.is_finite()) {
                return p;
            }
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
        if shift > 1e12 * scale {
            return -g.clone();
        }
    }
}

pub fn newton_minimize<O: Objective>(obj: &mut O, x0: &[f64], opts: &NewtonOptions) -> Result<Minimum> {
    let mut x = DVector::from_column_slice(x0);
    let mut last_grad = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let (f, g, h) = obj.derivatives(x.as_slice());
        let gn = sup_norm(&g);
        last_grad = gn;
        if gn <= opts.grad_tol {
            return Ok(Minimum { x: x.as_slice().to_vec(), value: f, grad_norm: gn, iterations: iter });
        }
        let mut p = newton_direction(&g, &h);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            p = -g.clone();
            slope = -g.norm_squared();
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &x + &p * alpha;
            let ft = obj.value(trial.as_slice());
            if ft.is_finite() && ft <= f + 1e-4 * alpha * slope {
                accepted = true;
            } else if alpha == 1.0 && ft.is_finite() && (ft - f).abs() <= 1e-13 * f.abs().max(1.0) {
                // Near the minimum the decrease drowns in rounding; take
                // the full step if it still shrinks the gradient.
                let (_, gt, _) = obj.derivatives(trial.as_slice());
                accepted = sup_norm(&gt) < 0.5 * gn;
            }
            if accepted {
                x = trial;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if gn <= opts.stall_tol {
                return Ok(Minimum { x: x.as_slice().to_vec(), value: f, grad_norm: gn, iterations: iter });
            }
            return Err(Error::NonConvergence { what: opts.what, iterations: iter, residual: gn });
        }
    }
    let (f, g, _) = obj.derivatives(x.as_slice());
    let gn = sup_norm(&g);
    if gn <= opts.stall_tol {
        return Ok(Minimum { x: x.as_slice().to_vec(), value: f, grad_norm: gn, iterations: opts.max_iter });
    }
    Err(Error::NonConvergence { what: opts.what, iterations: opts.max_iter, residual: last_grad.min(gn) })
}
