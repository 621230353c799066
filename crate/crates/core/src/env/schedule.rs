use super::probvec::ProbVec;
use crate::error::{Error, Result};

/// A time-periodic jump rule `q_0, ..., q_{k-1}`, with its distinct support
/// and the multiplicity of each support element.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePeriodicSchedule {
    entries: Vec<ProbVec>,
    support: Vec<ProbVec>,
    counts: Vec<usize>,
}

impl TimePeriodicSchedule {
    pub fn new(entries: Vec<ProbVec>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("a schedule needs at least one entry"));
        }
        let dim = entries[0].dim();
        if entries.iter().any(|e| e.dim() != dim) {
            return Err(Error::invalid("schedule entries must share a dimension"));
        }
        let mut support: Vec<ProbVec> = Vec::new();
        let mut counts = Vec::new();
        for e in &entries {
            match support.iter().position(|s| s == e) {
                Some(i) => counts[i] += 1,
                None => {
                    support.push(e.clone());
                    counts.push(1);
                }
            }
        }
        Ok(Self { entries, support, counts })
    }

    /// A schedule realising integer multiplicities of the given vectors.
    pub fn from_counts(sigmas: &[ProbVec], counts: &[usize]) -> Result<Self> {
        if sigmas.len() != counts.len() {
            return Err(Error::invalid("one count per vector is required"));
        }
        let entries = sigmas
            .iter()
            .zip(counts)
            .flat_map(|(s, &c)| std::iter::repeat(s.clone()).take(c))
            .collect();
        Self::new(entries)
    }

    pub fn period(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ProbVec] {
        &self.entries
    }

    pub fn support(&self) -> &[ProbVec] {
        &self.support
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let k = self.period() as f64;
        self.counts.iter().map(|&c| c as f64 / k).collect()
    }
}
