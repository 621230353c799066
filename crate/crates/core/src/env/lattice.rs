use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned box `lo <= x <= hi` (inclusive) in `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl LatticeBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("box corners must have the same positive dimension"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::invalid("box is empty"));
        }
        Ok(Self { lo, hi })
    }

    /// `[-r, r]^d`.
    pub fn centered(dim: usize, radius: i64) -> Self {
        Self { lo: vec![-radius; dim], hi: vec![radius; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn num_sites(&self) -> usize {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }

    /// Row-major index with the first coordinate varying fastest.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0;
        let mut stride = 1;
        for a in 0..self.dim() {
            idx += (x[a] - self.lo[a]) as usize * stride;
            stride *= self.extent(a);
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let mut x = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let n = self.extent(a);
            x.push(self.lo[a] + (idx % n) as i64);
            idx /= n;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.num_sites()).map(move |i| self.point_at(i))
    }
}

pub fn l1_norm(x: &[i64]) -> i64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn linf_norm(x: &[i64]) -> i64 {
    x.iter().map(|v| v.abs()).max().unwrap_or(0)
}
