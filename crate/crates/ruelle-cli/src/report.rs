//! Machine-readable run reports: a flat metric map, per-criterion checks and
//! the artifact list, serialized as JSON next to the CSV artifacts.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn worst(a: Status, b: Status) -> Status {
        use Status::*;
        match (a, b) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionCheck {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub status: Status,
    pub config_hash: String,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub criteria: Vec<CriterionCheck>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            status: Status::Pass,
            config_hash,
            seed,
            metrics: BTreeMap::new(),
            criteria: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn check(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.status = Status::Fail;
        }
        self.criteria.push(CriterionCheck {
            id: id.to_string(),
            pass,
            detail,
        });
    }

    /// Check an absolute deviation against a declared tolerance (no-op when
    /// the criterion is not declared in the config).
    pub fn check_tol(&mut self, id: &str, value: f64, expected: Option<f64>, tol: Option<f64>) {
        if let (Some(e), Some(t)) = (expected, tol) {
            let dev = (value - e).abs();
            self.check(
                id,
                dev <= t,
                format!("value {value:.17e}, expected {e:.17e} +/- {t:.3e} (deviation {dev:.3e})"),
            );
        }
    }

    pub fn inconclusive(&mut self, id: &str, detail: String) {
        if self.status == Status::Pass {
            self.status = Status::Inconclusive;
        }
        self.criteria.push(CriterionCheck {
            id: id.to_string(),
            pass: false,
            detail,
        });
    }

    pub fn write_json(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// RFC-4180 CSV with LF endings and `.` decimals (Rust float formatting).
pub struct CsvArtifact {
    writer: csv::Writer<fs::File>,
    name: String,
}

impl CsvArtifact {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> std::io::Result<Self> {
        let file = fs::File::create(dir.join(name))?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(file);
        writer.write_record(header)?;
        Ok(Self {
            writer,
            name: name.to_string(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self, report: &mut RunReport) -> std::io::Result<()> {
        self.writer.flush()?;
        report.artifacts.push(self.name);
        Ok(())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn config_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    format!("sha256:{}", hex::encode(&digest[..8]))
}
