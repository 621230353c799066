use nalgebra::{DMatrix, DVector};

use crate::env::{step_dot, step_vector, Environment, PeriodicEnvironment};
use crate::error::{Error, Result};

/// The tilted transfer operator `M[x -> x+e] = exp(<theta, e>) omega(x, e)`
/// of the walk folded onto the period torus.
#[derive(Debug, Clone)]
pub struct TorusOperator {
    theta: Vec<f64>,
    steps: usize,
    /// `neighbors[x * 2d + k]` is the cell reached from `x` by step `k`.
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    parity: Option<Vec<u8>>,
}

impl TorusOperator {
    pub fn new(env: &PeriodicEnvironment, theta: &[f64]) -> Result<Self> {
        let d = env.dim();
        if theta.len() != d {
            return Err(Error::invalid("theta has the wrong dimension"));
        }
        let steps = 2 * d;
        let cells = env.num_cells();
        let tilt: Vec<f64> = (0..steps).map(|k| step_dot(theta, k).exp()).collect();
        let mut neighbors = Vec::with_capacity(cells * steps);
        let mut weights = Vec::with_capacity(cells * steps);
        for c in 0..cells {
            let x = env.cell_coords(c);
            let p = &env.palette()[env.cells()[c]];
            for k in 0..steps {
                let y: Vec<i64> = x.iter().zip(step_vector(d, k)).map(|(a, b)| a + b).collect();
                neighbors.push(env.cell_index(&y));
                weights.push(tilt[k] * p.get(k));
            }
        }
        let parity = env.is_bipartite().then(|| {
            (0..cells).map(|c| (env.cell_coords(c).iter().sum::<i64>().rem_euclid(2)) as u8).collect()
        });
        Ok(Self { theta: theta.to_vec(), steps, neighbors, weights, parity })
    }

    /// An operator on an arbitrary finite state space with `steps` moves
    /// per state: `neighbors[x * steps + k]` and `weights[x * steps + k]`.
    /// `parity` names a two-colouring when every move changes colour.
    pub fn from_transitions(
        theta: Vec<f64>,
        steps: usize,
        neighbors: Vec<usize>,
        weights: Vec<f64>,
        parity: Option<Vec<u8>>,
    ) -> Result<Self> {
        let cells = neighbors.len() / steps.max(1);
        if steps == 0 || neighbors.len() != weights.len() || neighbors.len() != cells * steps {
            return Err(Error::invalid("transition arrays have inconsistent lengths"));
        }
        if neighbors.iter().any(|&y| y >= cells) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("transition arrays contain invalid entries"));
        }
        if parity.as_ref().is_some_and(|p| p.len() != cells) {
            return Err(Error::invalid("parity has the wrong length"));
        }
        Ok(Self { theta, steps, neighbors, weights, parity })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn num_cells(&self) -> usize {
        self.neighbors.len() / self.steps
    }

    /// `(M f)(x) = sum_e M[x -> x+e] f(x+e)`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        for (x, o) in out.iter_mut().enumerate() {
            let base = x * self.steps;
            *o = (0..self.steps).map(|k| self.weights[base + k] * f[self.neighbors[base + k]]).sum();
        }
    }

    /// `(mu M)(y) = sum_x mu(x) M[x -> y]`.
    pub fn apply_transpose(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (x, &m) in mu.iter().enumerate() {
            let base = x * self.steps;
            for k in 0..self.steps {
                out[self.neighbors[base + k]] += m * self.weights[base + k];
            }
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.weights.chunks(self.steps).map(|r| r.iter().sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.num_cells();
        let mut m = DMatrix::zeros(n, n);
        for x in 0..n {
            for k in 0..self.steps {
                m[(x, self.neighbors[x * self.steps + k])] += self.weights[x * self.steps + k];
            }
        }
        m
    }

    /// Parity class of each cell when the torus graph is bipartite.
    pub fn parity(&self) -> Option<&[u8]> {
        self.parity.as_deref()
    }
}

#[derive(Debug, Clone)]
pub struct PerronRoot {
    pub log_radius: f64,
    /// Width of the Collatz-Wielandt bracket on `log rho`.
    pub bracket: f64,
    /// Positive right eigenvector, max-normalised.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Dense matrices up to this size may fall back to shifted inverse
/// iteration when plain power iteration is slow.
const DENSE_LIMIT: usize = 1600;

fn bracket(num: &[f64], den: &[f64], support: &[usize]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &i in support {
        let r = num[i] / den[i];
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

fn normalise(v: &mut [f64]) {
    let m = v.iter().cloned().fold(0.0f64, f64::max);
    v.iter_mut().for_each(|x| *x /= m);
}

/// Perron root of the operator, by power iteration on `M^2` (restricted to
/// one parity class on bipartite tori) with the Collatz-Wielandt min/max
/// ratio bracket as stopping rule. `tol` bounds the bracket width on
/// `log rho`.
pub fn perron_root(op: &TorusOperator, tol: f64) -> Result<PerronRoot> {
    let n = op.num_cells();
    let parity = op.parity();
    let support: Vec<usize> = match parity {
        Some(p) => (0..n).filter(|&i| p[i] == 0).collect(),
        None => (0..n).collect(),
    };
    let mut f = vec![0.0; n];
    for &i in &support {
        f[i] = 1.0;
    }
    let mut tmp = vec![0.0; n];
    let mut g = vec![0.0; n];
    let budget = (40_000_000 / (n * op.steps)).clamp(400, 200_000);
    let power_budget = if n <= DENSE_LIMIT { budget.min(2000) } else { budget };
    let mut last = (0.0, f64::INFINITY);
    for it in 1..=power_budget {
        op.apply(&f, &mut tmp);
        op.apply(&tmp, &mut g);
        let (lo, hi) = bracket(&g, &f, &support);
        last = (lo, hi);
        let width = 0.5 * (hi / lo).ln();
        std::mem::swap(&mut f, &mut g);
        normalise(&mut f);
        if width <= tol {
            let log_radius = 0.25 * (lo.ln() + hi.ln());
            let mut vector = f.clone();
            if parity.is_some() {
                // extend to the odd class: f_odd = M f_even / rho
                op.apply(&f, &mut tmp);
                let rho = log_radius.exp();
                for i in 0..n {
                    if vector[i] == 0.0 {
                        vector[i] = tmp[i] / rho;
                    }
                }
                normalise(&mut vector);
            }
            return Ok(PerronRoot { log_radius, bracket: width, vector, iterations: it });
        }
    }
    if n > DENSE_LIMIT {
        return Err(Error::NonConvergence {
            what: "Perron power iteration",
            iterations: power_budget,
            residual: 0.5 * (last.1 / last.0).ln(),
        });
    }
    shifted_inverse_iteration(op, f, last.1.sqrt(), tol, power_budget)
}

/// Inverse iteration with a shift just above the Perron root; `sI - M` is
/// then a nonsingular M-matrix and its inverse is positive.
fn shifted_inverse_iteration(
    op: &TorusOperator,
    mut f: Vec<f64>,
    upper: f64,
    tol: f64,
    done: usize,
) -> Result<PerronRoot> {
    let n = op.num_cells();
    let m = op.to_dense();
    let mut tmp = vec![0.0; n];
    op.apply(&f, &mut tmp);
    for i in 0..n {
        f[i] += tmp[i] / upper;
    }
    normalise(&mut f);
    let all: Vec<usize> = (0..n).collect();
    let mut shift = upper * (1.0 + 1e-6);
    let mut width = f64::INFINITY;
    for it in 1..=60 {
        let lu = (DMatrix::identity(n, n) * shift - &m).lu();
        let next = lu
            .solve(&DVector::from_column_slice(&f))
            .ok_or(Error::NonConvergence { what: "Perron inverse iteration", iterations: it, residual: width })?;
        f.copy_from_slice(next.as_slice());
        if f.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NonConvergence { what: "Perron inverse iteration", iterations: it, residual: width });
        }
        normalise(&mut f);
        op.apply(&f, &mut tmp);
        let (lo, hi) = bracket(&tmp, &f, &all);
        width = (hi / lo).ln();
        if width <= tol {
            return Ok(PerronRoot {
                log_radius: 0.5 * (lo.ln() + hi.ln()),
                bracket: width,
                vector: f,
                iterations: done + it,
            });
        }
        let candidate = hi * (1.0 + 1e-12);
        if candidate < shift {
            shift = candidate;
        }
    }
    Err(Error::NonConvergence { what: "Perron inverse iteration", iterations: done + 60, residual: width })
}

/// `log rho(M_theta)`.
pub fn spectral_log_radius(op: &TorusOperator, tol: f64) -> Result<f64> {
    perron_root(op, tol).map(|p| p.log_radius)
}
