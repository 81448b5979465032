//! Experiment results and their serialization.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::params::ParameterSet;
use crate::{HarnessError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), value, threshold, pass: value >= threshold }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Assertion { name: name.into(), value: ok as u8 as f64, threshold: 1.0, pass: ok }
    }
}

/// A CSV table kept in memory until the report is written.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

impl Table {
    pub fn from_rows<T: Serialize>(name: &str, rows: &[T]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(vec![]);
        for r in rows {
            w.serialize(r).map_err(|e| HarnessError::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Report(e.to_string()))?;
        Ok(Table { name: name.into(), csv: String::from_utf8_lossy(&bytes).into_owned() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub parameters: ParameterSet,
    pub metrics: serde_json::Value,
    pub assertions: Vec<Assertion>,
    pub runtime_s: f64,
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    /// Writes the tables next to `report.json` and records their paths.
    pub fn write_tables(&mut self, out_dir: &Path) -> Result<()> {
        for t in &self.tables {
            let path = out_dir.join(format!("{}_{}.csv", self.experiment, t.name));
            std::fs::write(&path, &t.csv)?;
            self.artifacts.push(path.display().to_string());
        }
        Ok(())
    }
}

pub fn write_report(out_dir: &Path, results: &[ExperimentResult]) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("report.json");
    let text = serde_json::to_string_pretty(results).map_err(|e| HarnessError::Report(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Machine-readable error record.
pub fn error_record(e: &HarnessError) -> serde_json::Value {
    serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() })
}
