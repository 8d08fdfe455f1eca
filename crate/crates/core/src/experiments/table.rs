use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Sweep, VERSION};
use crate::error::{Result, SibaError};

/// Everything needed to regenerate a table bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operation: String,
    pub version: String,
    /// Settings of the sweep, as passed to it.
    pub settings: serde_json::Value,
    /// SHA-256 of the compact JSON encoding of `settings`.
    pub settings_hash: String,
    pub grid: BTreeMap<String, usize>,
}

impl Provenance {
    pub fn of<S: Sweep>(settings: &S, grid: &[(&str, usize)]) -> Result<Self> {
        let value = serde_json::to_value(settings).map_err(|e| SibaError::validation("settings", e.to_string()))?;
        Ok(Provenance {
            operation: S::OPERATION.to_string(),
            version: VERSION.to_string(),
            settings_hash: hash_json(&value),
            settings: value,
            grid: grid.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        })
    }
}

pub fn hash_json(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values always serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Text column appended after the numeric columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelColumn {
    pub name: String,
    pub values: Vec<String>,
}

/// Rectangular numeric table, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<LabelColumn>,
    pub provenance: Provenance,
}

impl SweepTable {
    pub fn new(name: &str, columns: &[&str], provenance: Provenance) -> Self {
        SweepTable {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            labels: None,
            provenance,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header of {}", self.name);
        self.rows.push(row);
    }

    pub fn with_labels(mut self, name: &str, values: Vec<String>) -> Self {
        assert_eq!(values.len(), self.rows.len(), "one label per row");
        self.labels = Some(LabelColumn { name: name.to_string(), values });
        self
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn is_rectangular(&self) -> bool {
        self.rows.iter().all(|r| r.len() == self.columns.len())
            && self.labels.as_ref().is_none_or(|l| l.values.len() == self.rows.len())
    }

    /// CSV with a header row, `,` separators, shortest round-trip decimals and
    /// `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        if let Some(l) = &self.labels {
            out.push(',');
            out.push_str(&l.name);
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v:?}").unwrap();
            }
            if let Some(l) = &self.labels {
                out.push(',');
                out.push_str(&l.values[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Parses [`Self::to_csv`] output; a trailing non-numeric column becomes the
    /// label column. A table without rows reads back unlabelled.
    pub fn parse_csv(name: &str, text: &str, provenance: Provenance) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| SibaError::validation("csv", "empty input"))?.split(',').collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut labelled = None;
        for (k, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(SibaError::validation("csv", format!("row {} has {} cells, header has {}", k + 1, cells.len(), header.len())));
            }
            let last = cells[cells.len() - 1];
            let is_label = *labelled.get_or_insert_with(|| last.parse::<f64>().is_err());
            let numeric = if is_label { &cells[..cells.len() - 1] } else { &cells[..] };
            let row = numeric
                .iter()
                .map(|c| c.parse::<f64>().map_err(|e| SibaError::validation("csv", format!("row {}: {c:?}: {e}", k + 1))))
                .collect::<Result<Vec<f64>>>()?;
            if is_label {
                labels.push(last.to_string());
            }
            rows.push(row);
        }
        let labelled = labelled.unwrap_or(false);
        let ncols = if labelled { header.len() - 1 } else { header.len() };
        Ok(SweepTable {
            name: name.to_string(),
            columns: header[..ncols].iter().map(|s| s.to_string()).collect(),
            rows,
            labels: labelled.then(|| LabelColumn { name: header[ncols].to_string(), values: labels }),
            provenance,
        })
    }
}
