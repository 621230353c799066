use serde::Serialize;

use super::law::EnvironmentLaw;
use super::probvec::ProbVec;
use crate::error::{Error, Result};
use crate::hull::{locate_in_hull, HullPosition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nestling {
    Nestling,
    MarginallyNestling,
    NonNestling,
}

impl std::fmt::Display for Nestling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Nestling::Nestling => "nestling",
            Nestling::MarginallyNestling => "marginally_nestling",
            Nestling::NonNestling => "non_nestling",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub class: Nestling,
    pub affine_rank: usize,
    pub margin: Option<f64>,
    /// The drift hull has empty interior in `R^d`, so "interior" is never
    /// reachable here; a relative-interior convention could disagree.
    pub low_dimensional: bool,
    pub convention: &'static str,
}

/// Classifies by the position of the origin in the convex hull of the
/// atom drifts, with "interior" meaning the topological interior in `R^d`.
pub fn classify_atoms(atoms: &[ProbVec]) -> Result<ClassificationReport> {
    if atoms.is_empty() {
        return Err(Error::invalid("no atoms to classify"));
    }
    let drifts: Vec<Vec<f64>> = atoms.iter().map(ProbVec::drift).collect();
    let dim = drifts[0].len();
    let loc = locate_in_hull(&drifts, &vec![0.0; dim])?;
    let class = match loc.position {
        HullPosition::Interior => Nestling::Nestling,
        HullPosition::Boundary => Nestling::MarginallyNestling,
        HullPosition::Outside => Nestling::NonNestling,
    };
    Ok(ClassificationReport {
        class,
        affine_rank: loc.affine_rank,
        margin: loc.margin,
        low_dimensional: loc.affine_rank < dim,
        convention: "topological interior of the drift hull in R^d",
    })
}

pub fn classify_law(law: &EnvironmentLaw) -> Result<ClassificationReport> {
    classify_atoms(law.atoms())
}
