//! Experiment results and their on-disk form: `results.csv` plus `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::LabError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// Floats use 17 significant digits, enough to round-trip any `f64`.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub params: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metrics: Map<String, Value>,
    pub version: String,
    pub wall_time: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    params: &'a Value,
    metrics: &'a Map<String, Value>,
    version: &'a str,
    wall_time: f64,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, params: Value, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            params,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metrics: Map::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time: 0.0,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metric serializes");
        self.metrics.insert(key.to_string(), v);
    }

    /// Every float in the rows and metrics is finite. Metrics must not contain nulls.
    pub fn check_finite(&self) -> Result<(), LabError> {
        for (i, row) in self.rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Float(v) = cell {
                    if !v.is_finite() {
                        return Err(LabError::Core(lqm_core::Error::Construction(format!(
                            "non-finite value in row {i}, column {}",
                            self.columns[c]
                        ))));
                    }
                }
            }
        }
        fn walk(v: &Value) -> bool {
            match v {
                Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
                Value::Array(a) => a.iter().all(walk),
                Value::Object(o) => o.values().all(walk),
                // serde_json renders NaN and infinities as null.
                Value::Null => false,
                _ => true,
            }
        }
        if let Some((k, _)) = self.metrics.iter().find(|(_, v)| !walk(v)) {
            return Err(LabError::Core(lqm_core::Error::Construction(format!(
                "non-finite metric {k}"
            ))));
        }
        Ok(())
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>, LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| LabError::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| LabError::Io(std::io::Error::other(e.to_string())))
    }

    pub fn summary_json(&self) -> String {
        let summary = Summary {
            experiment: &self.experiment,
            params: &self.params,
            metrics: &self.metrics,
            version: &self.version,
            wall_time: self.wall_time,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }

    /// Writes `results.csv` and `summary.json` into `dir`, creating it if needed.
    pub fn emit(&self, dir: &Path) -> Result<(PathBuf, PathBuf), LabError> {
        self.check_finite()?;
        let csv = self.csv_bytes()?;
        fs::create_dir_all(dir)?;
        let csv_path = dir.join("results.csv");
        let json_path = dir.join("summary.json");
        fs::write(&csv_path, csv)?;
        fs::write(&json_path, self.summary_json() + "\n")?;
        Ok((csv_path, json_path))
    }
}
