//! CSV tables, content hashes and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
    /// Empty field (missing value).
    Na,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Na, Cell::F)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::B(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Na => String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    pub description: String,
}

/// In-memory table with documented columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            file: file.to_owned(),
            columns: columns
                .iter()
                .map(|(n, d)| Column {
                    name: (*n).to_owned(),
                    description: (*d).to_owned(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match {}", self.file);
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Config(format!("csv buffer: {e}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
    pub columns: Vec<Column>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Git-style blob hash (`sha256("blob <len>\0" + text)`) of the config
/// text with line endings normalized to `\n`.
pub fn config_hash(text: &str) -> String {
    let norm = text.replace("\r\n", "\n");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", norm.len()).as_bytes());
    h.update(norm.as_bytes());
    hex(&h.finalize())
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_table(dir: &Path, t: &Table) -> Result<Artifact, CliError> {
    let bytes = t.to_bytes()?;
    write_atomic(&dir.join(&t.file), &bytes)?;
    Ok(Artifact {
        file: t.file.clone(),
        rows: t.rows.len(),
        sha256: sha256_hex(&bytes),
        columns: t.columns.clone(),
    })
}

/// Small JSON report next to the tables (fit summaries and the like).
pub fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<Artifact, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(&dir.join(file), &bytes)?;
    Ok(Artifact {
        file: file.to_owned(),
        rows: 0,
        sha256: sha256_hex(&bytes),
        columns: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    BlowUp,
    Degraded,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::BlowUp => 3,
            Status::Degraded => 4,
            Status::Failed => 1,
        }
    }

    /// The more severe of two outcomes.
    pub fn worst(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Success => 0,
            Status::Degraded => 1,
            Status::BlowUp => 2,
            Status::Failed => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    /// Schedule values and other derived parameters.
    pub derived: serde_json::Value,
    pub status: Status,
    pub exit_code: u8,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn config_hash_ignores_line_endings() {
        let a = "kind = \"check\"\nseed = 3\n";
        assert_eq!(config_hash(a), config_hash(&a.replace('\n', "\r\n")));
        assert_ne!(config_hash(a), config_hash("kind = \"check\"\nseed = 4\n"));
        assert_eq!(config_hash(a).len(), 64);
    }

    #[test]
    fn worst_status_wins() {
        assert_eq!(Status::Success.worst(Status::Degraded), Status::Degraded);
        assert_eq!(Status::BlowUp.worst(Status::Degraded), Status::BlowUp);
    }
}
