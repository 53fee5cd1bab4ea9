use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::RunConfig;
use crate::analysis::{AnalysisSettings, GrowthFit, MssVerdict, SaturationEstimate};
use crate::error::{Error, Result};
use crate::hilbert::C64;

/// Version of the `report.json` layout described in `docs/report.schema.json`.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// Column-major numeric table written as CSV; the first column is always `t`.
#[derive(Clone, Debug)]
pub struct CsvTable {
    columns: Vec<Column>,
    data: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(t: &[f64], time_unit: &str) -> Self {
        Self {
            columns: vec![Column {
                name: "t".into(),
                unit: time_unit.into(),
            }],
            data: vec![t.to_vec()],
        }
    }

    pub fn real(mut self, name: &str, unit: &str, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.data[0].len(), "column {name} has the wrong length");
        self.columns.push(Column {
            name: name.into(),
            unit: unit.into(),
        });
        self.data.push(values.to_vec());
        self
    }

    /// Adds `<name>_re` and `<name>_im`.
    pub fn complex(self, name: &str, unit: &str, values: &[C64]) -> Self {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        self.real(&format!("{name}_re"), unit, &re)
            .real(&format!("{name}_im"), unit, &im)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |source: std::io::Error| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let csv_err = |e: csv::Error| Error::Io {
            path: path.display().to_string(),
            source: e.into(),
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .map_err(csv_err)?;
        for row in 0..self.data[0].len() {
            // Display for f64 is the shortest exact round-trip form
            w.write_record(self.data.iter().map(|col| col[row].to_string()))
                .map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub columns: Vec<Column>,
}

/// One named property checked by a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured value.
    pub value: f64,
    /// Threshold it was compared with.
    pub threshold: f64,
    /// A failing hard check is a numerical-validation failure (exit code 4).
    pub hard: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub package: String,
    pub version: String,
    pub seed: u64,
    pub memory_cap_bytes: u128,
    pub analysis: AnalysisSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturation_proxy: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub status: String,
    pub config: RunConfig,
    pub files: Vec<FileEntry>,
    pub growth_fit: Option<GrowthFit>,
    pub saturation: Option<SaturationEstimate>,
    pub mss: Option<MssVerdict>,
    pub metrics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Reports of independent sub-runs, each also written to `<name>/report.json`.
    pub parts: BTreeMap<String, ExperimentReport>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(config: &RunConfig, provenance: Provenance) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: config.experiment.clone(),
            status: "ok".into(),
            config: config.clone(),
            files: Vec::new(),
            growth_fit: None,
            saturation: None,
            mss: None,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            parts: BTreeMap::new(),
            provenance,
        }
    }

    pub fn metric(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(name.into(), v);
    }

    pub fn check(&mut self, name: &str, passed: bool, value: f64, threshold: f64) {
        self.push_check(name, passed, value, threshold, false);
    }

    pub fn hard_check(&mut self, name: &str, passed: bool, value: f64, threshold: f64) {
        self.push_check(name, passed, value, threshold, true);
    }

    fn push_check(&mut self, name: &str, passed: bool, value: f64, threshold: f64, hard: bool) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            value,
            threshold,
            hard,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// First failing hard check, if any.
    pub fn hard_failure(&self) -> Option<&Check> {
        self.checks
            .iter()
            .find(|c| c.hard && !c.passed)
            .or_else(|| self.parts.values().find_map(|p| p.hard_failure()))
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Output directory that records every file written into the report.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&root).map_err(|source| Error::Io {
            path: root.display().to_string(),
            source,
        })?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn sub(&self, name: &str) -> Result<Self> {
        Self::create(self.root.join(name))
    }

    pub fn table(&self, report: &mut ExperimentReport, name: &str, table: &CsvTable) -> Result<()> {
        table.write(&self.root.join(name))?;
        report.files.push(FileEntry {
            name: name.into(),
            columns: table.columns().to_vec(),
        });
        Ok(())
    }

    pub fn report(&self, report: &ExperimentReport) -> Result<()> {
        let path = self.root.join("report.json");
        let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e.into(),
        })?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// `metric` helper for values that may be non-finite (JSON has no NaN).
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let t = CsvTable::new(&[0.0, 0.5], "1/J").real("C", "1", &[0.0, 0.25]).complex(
            "F",
            "1",
            &[C64::new(1.0, 0.0), C64::new(0.5, -0.1)],
        );
        let path = dir.path().join("x.csv");
        t.write(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "t,C,F_re,F_im\n0,0,1,0\n0.5,0.25,0.5,-0.1\n");
    }
}
