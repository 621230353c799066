use serde::{Deserialize, Serialize};

use super::probvec::ProbVec;
use super::Environment;
use crate::error::{Error, Result};

/// Nonnegative residue of `x` modulo `n`.
#[inline]
pub fn residue(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// An environment that is `period`-periodic: the jump law at `x` is the
/// table entry at `x mod period`.
///
/// The table is stored as a palette of distinct vectors plus one palette
/// index per cell of the period box, first coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicRaw")]
pub struct PeriodicEnvironment {
    period: Vec<usize>,
    palette: Vec<ProbVec>,
    cells: Vec<usize>,
    kappa: f64,
}

/// Accepted input forms: `{period, table}` with one vector per cell, or
/// `{period, palette, cells}` as serialised. A `kappa` field is ignored
/// (it is recomputed).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PeriodicRaw {
    period: Vec<usize>,
    #[serde(default)]
    table: Option<Vec<ProbVec>>,
    #[serde(default)]
    palette: Option<Vec<ProbVec>>,
    #[serde(default)]
    cells: Option<Vec<usize>>,
    #[serde(default)]
    #[allow(dead_code)]
    kappa: Option<f64>,
}

impl TryFrom<PeriodicRaw> for PeriodicEnvironment {
    type Error = Error;

    fn try_from(raw: PeriodicRaw) -> Result<Self> {
        match (raw.table, raw.palette, raw.cells) {
            (Some(table), None, None) => Self::from_table(raw.period, table),
            (None, Some(palette), Some(cells)) => Self::from_palette(raw.period, palette, cells),
            _ => Err(Error::invalid("periodic environment needs either `table` or both `palette` and `cells`")),
        }
    }
}

impl PeriodicEnvironment {
    /// Builds from one vector per cell of the period box.
    pub fn from_table(period: Vec<usize>, table: Vec<ProbVec>) -> Result<Self> {
        let mut palette: Vec<ProbVec> = Vec::new();
        let mut cells = Vec::with_capacity(table.len());
        for p in table {
            let idx = match palette.iter().position(|q| *q == p) {
                Some(i) => i,
                None => {
                    palette.push(p);
                    palette.len() - 1
                }
            };
            cells.push(idx);
        }
        Self::from_palette(period, palette, cells)
    }

    /// Builds from an explicit palette and per-cell palette indices. The
    /// palette order is kept, which lets callers fix class labels.
    pub fn from_palette(period: Vec<usize>, palette: Vec<ProbVec>, cells: Vec<usize>) -> Result<Self> {
        if period.is_empty() || period.contains(&0) {
            return Err(Error::invalid("period entries must be positive"));
        }
        let volume: usize = period.iter().product();
        if cells.len() != volume {
            return Err(Error::invalid(format!(
                "table has {} entries but the period box has {volume} sites",
                cells.len()
            )));
        }
        if palette.is_empty() {
            return Err(Error::invalid("empty palette"));
        }
        let dim = period.len();
        if let Some(p) = palette.iter().find(|p| p.dim() != dim) {
            return Err(Error::invalid(format!(
                "table entry of dimension {} in a {dim}-dimensional period",
                p.dim()
            )));
        }
        if cells.iter().any(|&c| c >= palette.len()) {
            return Err(Error::invalid("cell refers to a missing palette entry"));
        }
        let kappa = palette.iter().map(ProbVec::min_entry).fold(f64::INFINITY, f64::min);
        if !(kappa > 0.0) {
            return Err(Error::invalid("periodic environments must be uniformly elliptic"));
        }
        Ok(Self { period, palette, cells, kappa })
    }

    pub fn homogeneous(sigma: ProbVec) -> Result<Self> {
        let dim = sigma.dim();
        Self::from_palette(vec![1; dim], vec![sigma], vec![0])
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// The full table, one vector per cell.
    pub fn table(&self) -> impl Iterator<Item = &ProbVec> + '_ {
        self.cells.iter().map(move |&c| &self.palette[c])
    }

    /// Linear index of the residue class of `x`.
    pub fn cell_index(&self, x: &[i64]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (a, &n) in self.period.iter().enumerate() {
            idx += residue(x[a], n) * stride;
            stride *= n;
        }
        idx
    }

    /// Coordinates in the period box of linear cell index `idx`.
    pub fn cell_coords(&self, mut idx: usize) -> Vec<i64> {
        self.period
            .iter()
            .map(|&n| {
                let c = idx % n;
                idx /= n;
                c as i64
            })
            .collect()
    }

    /// The jump law at `x`.
    pub fn lookup(&self, x: &[i64]) -> &ProbVec {
        &self.palette[self.cells[self.cell_index(x)]]
    }

    /// The same environment seen from `shift`: `lookup'(x) = lookup(x + shift)`.
    pub fn translated(&self, shift: &[i64]) -> Self {
        let cells = (0..self.num_cells())
            .map(|i| {
                let mut x = self.cell_coords(i);
                for (v, s) in x.iter_mut().zip(shift) {
                    *v += s;
                }
                self.cells[self.cell_index(&x)]
            })
            .collect();
        Self { period: self.period.clone(), palette: self.palette.clone(), cells, kappa: self.kappa }
    }

    /// Smallest rectangular period describing the same environment. For
    /// every axis this is the least divisor `p` of `n_i` with the table
    /// invariant under a shift by `p` along that axis.
    pub fn reduced(&self) -> Self {
        let mut env = self.clone();
        for axis in 0..self.period.len() {
            let n = env.period[axis];
            let p = (1..=n)
                .filter(|p| n % p == 0)
                .find(|&p| {
                    let mut shift = vec![0; env.period.len()];
                    shift[axis] = p as i64;
                    (0..env.num_cells()).all(|i| {
                        let mut x = env.cell_coords(i);
                        let c = env.cells[i];
                        for (v, s) in x.iter_mut().zip(&shift) {
                            *v += s;
                        }
                        env.cells[env.cell_index(&x)] == c
                    })
                })
                .unwrap_or(n);
            if p < n {
                let mut period = env.period.clone();
                period[axis] = p;
                let volume: usize = period.iter().product();
                let probe = Self {
                    period: period.clone(),
                    palette: env.palette.clone(),
                    cells: vec![0; volume],
                    kappa: env.kappa,
                };
                let cells = (0..volume)
                    .map(|i| env.cells[env.cell_index(&probe.cell_coords(i))])
                    .collect();
                env = Self { cells, ..probe };
            }
        }
        env.prune_palette()
    }

    fn prune_palette(self) -> Self {
        let mut used = vec![false; self.palette.len()];
        for &c in &self.cells {
            used[c] = true;
        }
        if used.iter().all(|&u| u) {
            return self;
        }
        let mut remap = vec![usize::MAX; self.palette.len()];
        let mut palette = Vec::new();
        for (i, p) in self.palette.into_iter().enumerate() {
            if used[i] {
                remap[i] = palette.len();
                palette.push(p);
            }
        }
        let cells = self.cells.iter().map(|&c| remap[c]).collect();
        Self { period: self.period, palette, cells, kappa: self.kappa }
    }

    /// True when every period is even, so the torus graph is bipartite.
    pub fn is_bipartite(&self) -> bool {
        self.period.iter().all(|n| n % 2 == 0)
    }
}

impl Environment for PeriodicEnvironment {
    fn dim(&self) -> usize {
        self.period.len()
    }

    fn palette(&self) -> &[ProbVec] {
        &self.palette
    }

    fn class_at(&self, x: &[i64]) -> Result<usize> {
        Ok(self.cells[self.cell_index(x)])
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }
}
