//! Result documents (JSON) and their CSV tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
}

/// Named numeric table; every cell is finite.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    /// `None` when the quantity could not be computed or is not finite.
    pub measured: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured: measured.is_finite().then_some(measured),
            threshold,
            passed: measured <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionRecord {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub error: Option<String>,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub status: Status,
    /// Complex scalars as `[re, im]`.
    pub scalars: BTreeMap<String, [f64; 2]>,
    pub diagnostics: BTreeMap<String, f64>,
    pub checks: Vec<CheckRecord>,
    pub tables: BTreeMap<String, Table>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ResultDocument {
    pub fn new(command: &str, config_hash: String) -> Self {
        Self {
            version: VERSION.to_string(),
            command: command.to_string(),
            config_hash,
            status: Status::Passed,
            scalars: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            checks: Vec::new(),
            tables: BTreeMap::new(),
            criteria: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn scalar(&mut self, name: &str, z: Complex64) {
        self.scalars.insert(name.to_string(), [z.re, z.im]);
    }

    /// Records a finite diagnostic; non-finite values become a note.
    pub fn diagnostic(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.diagnostics.insert(name.to_string(), value);
        } else {
            self.notes.push(format!("diagnostic {name} is not finite ({value})"));
        }
    }

    pub fn check(&mut self, name: &str, measured: f64, threshold: f64) {
        let c = CheckRecord::new(name, measured, threshold);
        if !c.passed {
            self.status = Status::Failed;
        }
        self.checks.push(c);
    }

    pub fn failed_checks(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed result document: {e}")))
    }

    /// Writes `<command>.json` and one `<command>_<table>.csv` per table.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let stem = self.command.replace('-', "_");
        let json = dir.join(format!("{stem}.json"));
        fs::write(&json, self.to_json())?;
        let mut written = vec![json];
        for (name, table) in &self.tables {
            let path = dir.join(format!("{stem}_{name}.csv"));
            write_csv(&path, table)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Numbers as `{:.16e}`: 17 significant digits, exact on re-parse.
pub fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_failure_flips_status() {
        let mut d = ResultDocument::new("verify", "h".into());
        d.check("ok", 1e-12, 1e-9);
        assert_eq!(d.status, Status::Passed);
        d.check("bad", f64::NAN, 1e-9);
        assert_eq!(d.status, Status::Failed);
        assert_eq!(d.checks[1].measured, None);
        assert_eq!(d.failed_checks().len(), 1);
    }

    #[test]
    fn csv_and_json_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = ResultDocument::new("kv-trace", "abc".into());
        let mut t = Table::new(["x", "re"]);
        t.push(vec![0.0, 0.1]);
        d.tables.insert("density".into(), t);
        d.diagnostic("inf", f64::INFINITY);
        let files = d.write(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read_to_string(dir.path().join("kv_trace_density.csv")).unwrap();
        assert_eq!(csv, "x,re\n0.0000000000000000e0,1.0000000000000001e-1\n");
        let back = ResultDocument::from_json(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
