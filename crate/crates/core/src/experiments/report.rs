use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn new(value: f64, std_error: f64) -> Self {
        Self { value, std_error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }
}

/// Named numeric columns of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Comma-separated, `\n` line endings, header first. Floats use the
    /// shortest representation that parses back to the same bits.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config_echo: BTreeMap<String, String>,
    pub seed: u64,
    pub tables: BTreeMap<String, Table>,
    pub summary: BTreeMap<String, Estimate>,
    /// Extra output files (name -> bytes), e.g. a bitstream or a density matrix.
    #[serde(skip)]
    pub artifacts: BTreeMap<String, Vec<u8>>,
}

impl ExperimentReport {
    pub fn new(name: &str, seed: u64, config_echo: BTreeMap<String, String>) -> Self {
        Self { name: name.to_string(), seed, config_echo, ..Default::default() }
    }

    pub fn set(&mut self, key: &str, estimate: Estimate) {
        self.summary.insert(key.to_string(), estimate);
    }

    pub fn set_exact(&mut self, key: &str, value: f64) {
        self.set(key, Estimate::exact(value));
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).map(|e| e.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.get(name)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, e) in &self.summary {
            if !(e.value.is_finite() && e.std_error.is_finite()) {
                return Err(Error::Domain(format!("summary `{k}` is not finite")));
            }
        }
        for (name, t) in &self.tables {
            if t.rows.iter().any(|r| r.len() != t.columns.len()) {
                return Err(Error::Domain(format!("table `{name}` has ragged rows")));
            }
        }
        Ok(())
    }

    /// `report.json` body: name, seed, config echo, summary and table names.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            name: &'a str,
            seed: u64,
            config: &'a BTreeMap<String, String>,
            summary: &'a BTreeMap<String, Estimate>,
            tables: Vec<String>,
            artifacts: Vec<&'a String>,
        }
        let doc = Doc {
            name: &self.name,
            seed: self.seed,
            config: &self.config_echo,
            summary: &self.summary,
            tables: self.tables.keys().map(|k| format!("{k}.csv")).collect(),
            artifacts: self.artifacts.keys().collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Parameter echo: one string per field of a serializable parameter struct.
pub fn echo<T: Serialize>(params: &T) -> BTreeMap<String, String> {
    match serde_json::to_value(params) {
        Ok(serde_json::Value::Object(map)) => map
            .into_iter()
            .map(|(k, v)| {
                let s = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(", "),
                    other => other.to_string(),
                };
                (k, s)
            })
            .collect(),
        _ => BTreeMap::new(),
    }
}
