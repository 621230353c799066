//! Where a point sits relative to the convex hull of a finite point set.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Margins at or below this are treated as zero.
pub const INTERIOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HullPosition {
    Interior,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Serialize)]
pub struct HullLocation {
    pub position: HullPosition,
    /// Optimum of `max eps` s.t. `lambda_i >= eps`, `sum lambda = 1`,
    /// `sum lambda_i (x_i - target) = 0`; `None` when infeasible.
    pub margin: Option<f64>,
    /// Affine rank of the point set.
    pub affine_rank: usize,
    pub ambient_dim: usize,
}

/// Affine rank of a point set: rank of the differences to the first point.
pub fn affine_rank(points: &[Vec<f64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let dim = points[0].len();
    let m = DMatrix::from_fn(points.len() - 1, dim, |i, j| points[i + 1][j] - points[0][j]);
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    m.svd(false, false).rank(1e-10 * scale)
}

/// Decides whether `target` lies in the topological interior, on the
/// boundary, or outside the convex hull of `points` in `R^dim`.
pub fn locate_in_hull(points: &[Vec<f64>], target: &[f64]) -> Result<HullLocation> {
    if points.is_empty() {
        return Err(Error::invalid("empty point set"));
    }
    let dim = target.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("point dimensions differ"));
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let eps = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    let lambdas: Vec<_> = points.iter().map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    for &l in &lambdas {
        lp.add_constraint([(l, 1.0), (eps, -1.0)], ComparisonOp::Ge, 0.0);
    }
    lp.add_constraint(lambdas.iter().map(|&l| (l, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    for axis in 0..dim {
        let row: Vec<_> = lambdas
            .iter()
            .zip(points)
            .map(|(&l, p)| (l, p[axis] - target[axis]))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        if !row.is_empty() {
            lp.add_constraint(row, ComparisonOp::Eq, 0.0);
        }
    }
    let margin = match lp.solve() {
        Ok(sol) => Some(sol.objective()),
        Err(minilp::Error::Infeasible) => None,
        Err(e) => return Err(Error::Lp(e.to_string())),
    };
    let rank = affine_rank(points);
    let position = match margin {
        None => HullPosition::Outside,
        Some(m) if m < -INTERIOR_TOL => HullPosition::Outside,
        Some(m) if m <= INTERIOR_TOL => HullPosition::Boundary,
        Some(_) if rank == dim => HullPosition::Interior,
        Some(_) => HullPosition::Boundary,
    };
    Ok(HullLocation { position, margin, affine_rank: rank, ambient_dim: dim })
}
