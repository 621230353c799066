use serde::Serialize;

use super::saddle::{solve_saddle, SaddlePoint};
use crate::env::{classify_law, mix, EnvironmentLaw, Nestling, ProbVec};
use crate::error::Result;
use crate::hull::{locate_in_hull, HullPosition};

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCheck {
    /// `p*` is not in the interior of the hull of the atoms (inside the
    /// simplex of step distributions).
    pub on_boundary: bool,
    pub drift_zero: bool,
    pub position: HullPosition,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub i0: f64,
    pub p_star: ProbVec,
    pub t_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub gap: f64,
    pub classification: Nestling,
    pub on_boundary: bool,
    pub drift_zero: bool,
    pub saddle: SaddlePoint,
}

/// Decides whether `p_star` sits on the boundary of the hull of the law's
/// atoms. Coordinates are the first `2d - 1` step probabilities, which
/// parametrise the simplex affinely.
pub fn pstar_boundary_check(law: &EnvironmentLaw, p_star: &ProbVec, drift_tol: f64) -> Result<BoundaryCheck> {
    let chart = |p: &ProbVec| -> Vec<f64> { p.as_slice()[..p.as_slice().len() - 1].to_vec() };
    let points: Vec<Vec<f64>> = law.atoms().iter().map(chart).collect();
    let loc = locate_in_hull(&points, &chart(p_star))?;
    Ok(BoundaryCheck {
        on_boundary: loc.position != HullPosition::Interior,
        drift_zero: p_star.drift().iter().all(|x| x.abs() <= drift_tol),
        position: loc.position,
    })
}

/// `I(0) = inf` over the hull of the atoms of the single-site rate,
/// together with the maximiser `p*` and its certificate.
pub fn variational_i0(law: &EnvironmentLaw, tol: f64) -> Result<RateReport> {
    let saddle = solve_saddle(law.atoms(), tol)?;
    let p_star = mix(&saddle.t_star, law.atoms())?;
    let drift_tol = (10.0 * tol).max(1e-9);
    let check = pstar_boundary_check(law, &p_star, drift_tol)?;
    let classification = classify_law(law)?.class;
    Ok(RateReport {
        i0: (-saddle.value).max(0.0),
        p_star,
        t_star: saddle.t_star.clone(),
        theta_star: saddle.theta_star.clone(),
        gap: saddle.gap,
        classification,
        on_boundary: check.on_boundary,
        drift_zero: check.drift_zero,
        saddle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn law(ps: &[&[f64]]) -> EnvironmentLaw {
        let atoms: Vec<ProbVec> = ps.iter().map(|p| ProbVec::new(p.to_vec()).unwrap()).collect();
        let kappa = atoms.iter().map(ProbVec::min_entry).fold(1.0, f64::min);
        EnvironmentLaw::uniform(atoms, kappa).unwrap()
    }

    #[test]
    fn non_nestling_line() {
        let r = variational_i0(&law(&[&[0.6, 0.4], &[0.8, 0.2]]), 1e-8).unwrap();
        assert_abs_diff_eq!(r.i0, 0.020410997260127607, epsilon = 1e-8);
        assert_abs_diff_eq!(r.p_star.get(0), 0.6, epsilon = 1e-6);
        assert!(r.on_boundary && !r.drift_zero);
        assert_eq!(r.classification, Nestling::NonNestling);
    }

    #[test]
    fn mirrored_pair_in_the_plane() {
        let r = variational_i0(&law(&[&[0.4, 0.1, 0.3, 0.2], &[0.1, 0.4, 0.3, 0.2]]), 1e-8).unwrap();
        assert_abs_diff_eq!(r.i0, 0.010153423432868017, epsilon = 1e-8);
        for (a, b) in r.p_star.as_slice().iter().zip([0.25, 0.25, 0.3, 0.2]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-6);
        }
        let s: f64 = (0..2).map(|a| 2.0 * (r.p_star.get(2 * a) * r.p_star.get(2 * a + 1)).sqrt()).sum();
        assert_abs_diff_eq!(r.i0, -s.ln(), epsilon = 1e-8);
    }

    #[test]
    fn marginal_endpoint() {
        let r = variational_i0(&law(&[&[0.5, 0.5], &[0.7, 0.3]]), 1e-8).unwrap();
        assert_abs_diff_eq!(r.i0, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(r.p_star.get(0), 0.5, epsilon = 1e-6);
        assert!(r.on_boundary && r.drift_zero);
        assert_eq!(r.classification, Nestling::MarginallyNestling);
    }

    #[test]
    fn single_atom_is_on_its_own_boundary() {
        let l = law(&[&[0.3, 0.2, 0.25, 0.25]]);
        let c = pstar_boundary_check(&l, &l.atoms()[0], 1e-9).unwrap();
        assert!(c.on_boundary);
    }
}
