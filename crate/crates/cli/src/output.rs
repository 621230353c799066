use serde::Serialize;

use crate::error::{CliError, CliResult};

/// One file a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct Output {
    pub artifacts: Vec<Artifact>,
    /// Set when the command finished but could not certify its result.
    pub uncertified: Option<String>,
}

impl Output {
    pub fn json(mut self, name: &str, value: &impl Serialize) -> CliResult<Self> {
        self.artifacts.push(Artifact { name: format!("{name}.json"), bytes: to_json(value)? });
        Ok(self)
    }

    pub fn csv(mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Config(format!("csv: {e}"));
        w.write_record(header).map_err(fail)?;
        for r in rows {
            w.write_record(&r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
        self.artifacts.push(Artifact { name: format!("{name}.csv"), bytes });
        Ok(self)
    }

    /// The first JSON artifact, echoed on stdout.
    pub fn primary(&self) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name.ends_with(".json"))
    }
}

pub fn to_json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Config(format!("json: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Seventeen significant digits: enough to recover the exact double.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// [`float`], or an empty cell.
pub fn float_opt(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}
