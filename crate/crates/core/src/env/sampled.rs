use serde::Serialize;

use super::lattice::LatticeBox;
use super::law::EnvironmentLaw;
use super::probvec::ProbVec;
use super::Environment;
use crate::error::{Error, Result};

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` that depends only on `(seed, x)`.
pub fn site_uniform(seed: u64, x: &[i64]) -> f64 {
    let mut h = splitmix64(seed ^ 0x5eed_0f5e_ed0f_5eed);
    for &c in x {
        h = splitmix64(h ^ (c as u64));
    }
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The i.i.d. environment on all of `Z^d`, realised lazily: the atom at a
/// site is a pure function of the seed and the site coordinates.
#[derive(Debug, Clone)]
pub struct SiteSampler {
    law: EnvironmentLaw,
    seed: u64,
    cumulative: Vec<f64>,
}

impl SiteSampler {
    pub fn new(law: EnvironmentLaw, seed: u64) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = law
            .weights()
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = f64::INFINITY;
        Self { law, seed, cumulative }
    }

    pub fn law(&self) -> &EnvironmentLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn atom_at(&self, x: &[i64]) -> usize {
        let u = site_uniform(self.seed, x);
        self.cumulative.partition_point(|&c| c <= u)
    }
}

impl Environment for SiteSampler {
    fn dim(&self) -> usize {
        self.law.dim()
    }

    fn palette(&self) -> &[ProbVec] {
        self.law.atoms()
    }

    fn class_at(&self, x: &[i64]) -> Result<usize> {
        Ok(self.atom_at(x))
    }

    fn kappa(&self) -> f64 {
        self.law.kappa()
    }
}

/// A finite-window realisation of an i.i.d. law.
#[derive(Debug, Clone, Serialize)]
pub struct SampledEnvironment {
    pub window: LatticeBox,
    /// Atom index per site of `window`, first coordinate fastest.
    pub assignment: Vec<usize>,
    pub seed: u64,
    pub law: EnvironmentLaw,
}

impl SampledEnvironment {
    pub fn atom_at(&self, x: &[i64]) -> Option<usize> {
        self.window.index_of(x).map(|i| self.assignment[i])
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }
}

/// Draws the atom of every site in `window`; the result agrees with any
/// other window sampled under the same seed on their overlap.
pub fn sample_environment(law: &EnvironmentLaw, window: &LatticeBox, seed: u64) -> Result<SampledEnvironment> {
    if window.dim() != law.dim() {
        return Err(Error::invalid("window and law dimensions differ"));
    }
    let sampler = SiteSampler::new(law.clone(), seed);
    let assignment = window.points().map(|x| sampler.atom_at(&x)).collect();
    Ok(SampledEnvironment { window: window.clone(), assignment, seed, law: law.clone() })
}

impl Environment for SampledEnvironment {
    fn dim(&self) -> usize {
        self.law.dim()
    }

    fn palette(&self) -> &[ProbVec] {
        self.law.atoms()
    }

    fn class_at(&self, x: &[i64]) -> Result<usize> {
        self.atom_at(x).ok_or_else(|| Error::OutOfRange { site: x.to_vec() })
    }

    fn kappa(&self) -> f64 {
        self.law.kappa()
    }
}
