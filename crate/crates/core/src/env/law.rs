use serde::{Deserialize, Serialize};

use super::probvec::{ProbVec, SUM_TOL};
use crate::error::{Error, Result};

/// A finitely supported i.i.d. site law: the environment at every site is
/// `atoms[i]` with probability `weights[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawRaw")]
pub struct EnvironmentLaw {
    #[serde(skip)]
    dim: usize,
    kappa: f64,
    atoms: Vec<ProbVec>,
    weights: Vec<f64>,
}

/// `weights` default to uniform; `kappa` is required.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LawRaw {
    atoms: Vec<ProbVec>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    kappa: f64,
}

impl TryFrom<LawRaw> for EnvironmentLaw {
    type Error = Error;

    fn try_from(raw: LawRaw) -> Result<Self> {
        match raw.weights {
            Some(w) => Self::new(raw.atoms, w, raw.kappa),
            None => Self::uniform(raw.atoms, raw.kappa),
        }
    }
}

impl EnvironmentLaw {
    pub fn new(atoms: Vec<ProbVec>, weights: Vec<f64>, kappa: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("a law needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::invalid("one weight per atom is required"));
        }
        if !(kappa > 0.0) {
            return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
        }
        let dim = atoms[0].dim();
        for (i, a) in atoms.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::invalid(format!("atom {i} has dimension {}, expected {dim}", a.dim())));
            }
            if !a.is_elliptic(kappa) {
                return Err(Error::invalid(format!(
                    "atom {i} has minimum entry {} below kappa = {kappa}",
                    a.min_entry()
                )));
            }
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
            return Err(Error::invalid(format!("weight {i} is {w}, expected > 0")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {total:.17}, expected 1")));
        }
        for i in 0..atoms.len() {
            for k in i + 1..atoms.len() {
                if atoms[i].sup_distance(&atoms[k]) == 0.0 {
                    return Err(Error::invalid(format!("atoms {i} and {k} coincide")));
                }
            }
        }
        Ok(Self { dim, kappa, atoms, weights })
    }

    /// Uniform weights over the given atoms.
    pub fn uniform(atoms: Vec<ProbVec>, kappa: f64) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n], kappa)
    }

    /// A degenerate law concentrated on one vector.
    pub fn single(atom: ProbVec, kappa: f64) -> Result<Self> {
        Self::new(vec![atom], vec![1.0], kappa)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn atoms(&self) -> &[ProbVec] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVec {
        ProbVec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_laws() {
        let a = pv(&[0.6, 0.4]);
        let b = pv(&[0.8, 0.2]);
        assert!(EnvironmentLaw::new(vec![], vec![], 0.1).is_err());
        assert!(EnvironmentLaw::new(vec![a.clone(), a.clone()], vec![0.5, 0.5], 0.1).is_err());
        assert!(EnvironmentLaw::new(vec![a.clone(), b.clone()], vec![0.5, 0.4], 0.1).is_err());
        assert!(EnvironmentLaw::new(vec![a.clone(), b.clone()], vec![1.0, 0.0], 0.1).is_err());
        assert!(EnvironmentLaw::new(vec![a.clone(), b.clone()], vec![0.5, 0.5], 0.3).is_err());
        assert!(EnvironmentLaw::new(vec![a, b], vec![0.5, 0.5], 0.2).is_ok());
    }
}
