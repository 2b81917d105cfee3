//! Rectangular numeric result tables written as CSV plus a JSON sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    pub fn header(&self) -> String {
        format!("{}[{}]", self.name, self.unit)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub config_sha256: String,
    pub code_version: String,
    pub wall_clock_s: f64,
    pub unix_time_s: u64,
    /// Experiment-specific annotations.
    pub notes: serde_json::Map<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl ResultTable {
    pub fn new(name: &str, columns: Vec<Column>, config_json: &str) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::param("columns", "table needs at least one column"));
        }
        if columns
            .iter()
            .any(|c| c.unit.is_empty() || c.name.is_empty())
        {
            return Err(Error::param(
                "columns",
                "every column needs a name and a unit",
            ));
        }
        Ok(Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
            metadata: Metadata {
                config_sha256: sha256_hex(config_json),
                code_version: env!("CARGO_PKG_VERSION").into(),
                wall_clock_s: 0.0,
                unix_time_s: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                notes: serde_json::Map::new(),
            },
        })
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metadata.notes.insert(key.into(), v);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV text. Floats use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = self
            .columns
            .iter()
            .map(Column::header)
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for row in &self.rows {
            let line = row.iter().map(|v| format!("{v}")).collect::<Vec<_>>();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`; returns the
    /// CSV path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.name));
        std::fs::write(&csv, self.to_csv())?;
        let meta = serde_json::json!({
            "name": self.name,
            "columns": self.columns,
            "rows": self.rows.len(),
            "metadata": self.metadata,
        });
        std::fs::write(
            dir.join(format!("{}.meta.json", self.name)),
            serde_json::to_string_pretty(&meta)?,
        )?;
        Ok(csv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_string() {
        assert_eq!(
            sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(
            "x",
            vec![Column::new("time", "us"), Column::new("P0", "1")],
            "{}",
        )
        .unwrap();
        t.push_row(vec![0.0, 1.0]).unwrap();
        t.push_row(vec![0.004, 0.1 + 0.2]).unwrap();
        assert!(t.push_row(vec![1.0]).is_err());
        assert_eq!(
            t.to_csv(),
            "time[us],P0[1]\n0,1\n0.004,0.30000000000000004\n"
        );
        assert_eq!(t.column("P0").unwrap(), vec![1.0, 0.1 + 0.2]);
    }

    #[test]
    fn units_required() {
        assert!(ResultTable::new("x", vec![Column::new("t", "")], "{}").is_err());
    }
}
