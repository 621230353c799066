//! The run configuration shared by every front-end.
//!
//! One flat, strict schema: unknown fields are rejected, and a front-end
//! fills in every default it used before echoing the configuration back,
//! so a stored configuration replays exactly.

use serde::{Deserialize, Serialize};

use crate::env::{EnvironmentLaw, PeriodicEnvironment, ProbVec};
use crate::error::{Error, Result};
use crate::simulate::ScanMode;
use crate::strip::{PipelineOptions, StripSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// An i.i.d. site law: `{atoms, weights?, kappa}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<EnvironmentLaw>,
    /// A single step distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<ProbVec>,
    /// A finite family of step distributions (saddle problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec<ProbVec>>,
    /// A periodic environment: `{period, table}` or `{period, palette, cells}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<PeriodicEnvironment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment_file: Option<String>,
    /// The periodic environment a scan tries to match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PeriodicEnvironment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip: Option<StripSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_file: Option<String>,
    /// Target strip frequencies for occupation checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    /// Per-strip time fractions for the composed construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineOptions>,
    /// Evaluation point of a periodic rate function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Resource cap: DP steps or scanned sites, depending on the command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    /// Rate-at-zero method name (`closed`, `numeric`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Return-probability estimator name (`exact-dp`, `importance`, `naive`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ScanMode>,
}

fn missing(field: &str) -> Error {
    Error::InvalidInput(format!("missing field `{field}`"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn law(&self) -> Result<&EnvironmentLaw> {
        self.law.as_ref().ok_or_else(|| missing("law"))
    }

    pub fn sigma(&self) -> Result<&ProbVec> {
        self.sigma.as_ref().ok_or_else(|| missing("sigma"))
    }

    /// `sigmas`, falling back to the law's atoms.
    pub fn sigmas(&self) -> Result<Vec<ProbVec>> {
        match (&self.sigmas, &self.law) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(l)) => Ok(l.atoms().to_vec()),
            _ => Err(missing("sigmas")),
        }
    }

    pub fn environment(&self) -> Result<&PeriodicEnvironment> {
        self.environment.as_ref().ok_or_else(|| missing("environment"))
    }

    pub fn target(&self) -> Result<&PeriodicEnvironment> {
        self.target.as_ref().ok_or_else(|| missing("target"))
    }

    pub fn strip(&self) -> Result<&StripSpec> {
        self.strip.as_ref().ok_or_else(|| missing("strip"))
    }

    pub fn epsilon(&self) -> Result<f64> {
        self.epsilon.ok_or_else(|| missing("epsilon"))
    }

    pub fn delta(&self) -> Result<f64> {
        self.delta.ok_or_else(|| missing("delta"))
    }

    pub fn n(&self) -> Result<usize> {
        self.n.ok_or_else(|| missing("n"))
    }

    /// `n_grid`, or the single `n`.
    pub fn grid(&self) -> Result<Vec<usize>> {
        match (&self.n_grid, self.n) {
            (Some(g), _) if !g.is_empty() => Ok(g.clone()),
            (_, Some(n)) => Ok(vec![n]),
            _ => Err(missing("n_grid")),
        }
    }

    /// `seeds`, or the single `seed`.
    pub fn seed_list(&self) -> Vec<u64> {
        match (&self.seeds, self.seed) {
            (Some(s), _) if !s.is_empty() => s.clone(),
            (_, Some(s)) => vec![s],
            _ => vec![0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_fields() {
        let err = RunConfig::from_json(r#"{"sigma": [0.8, 0.2], "colour": 1}"#).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn law_needs_kappa() {
        let err = RunConfig::from_json(r#"{"law": {"atoms": [[0.8, 0.2]]}}"#).unwrap_err();
        assert!(err.to_string().contains("kappa"), "{err}");
        let ok = RunConfig::from_json(r#"{"law": {"atoms": [[0.8, 0.2], [0.3, 0.7]], "kappa": 0.2}}"#).unwrap();
        assert_eq!(ok.law().unwrap().weights(), &[0.5, 0.5]);
    }

    #[test]
    fn invalid_values_are_rejected_while_parsing() {
        assert!(RunConfig::from_json(r#"{"sigma": [0.8, 0.3]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"law": {"atoms": [[0.9, 0.1]], "kappa": 0.2}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"environment": {"period": [2], "table": [[0.5, 0.5]]}}"#).is_err());
    }

    #[test]
    fn round_trips() {
        let text = r#"{
            "law": {"atoms": [[0.4, 0.1, 0.3, 0.2], [0.1, 0.4, 0.3, 0.2]], "kappa": 0.1},
            "environment": {"period": [2], "table": [[0.8, 0.2], [0.3, 0.7]]},
            "strip": {"u": [0, 1], "radii": [0, 2, 4], "sigmas": [[0.4, 0.1, 0.3, 0.2], [0.1, 0.4, 0.3, 0.2]]},
            "pipeline": {"epsilon": 0.01},
            "n_grid": [10, 20], "seed": 3, "mode": "nearest"
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let again = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.grid().unwrap(), vec![10, 20]);
        assert_eq!(cfg.seed_list(), vec![3]);
        assert_eq!(cfg.sigmas().unwrap().len(), 2);
    }
}
