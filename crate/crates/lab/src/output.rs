//! Run directories: `manifest.json`, `results.json` and one CSV per table.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

/// A CSV table; cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| num(*v)).collect());
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub struct RunDir {
    path: PathBuf,
}

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

impl RunDir {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self, Failure> {
        let path = path.into();
        fs::create_dir_all(&path).map_err(|e| io(&path, e))?;
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let p = self.path.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io(&p, e))?;
        text.push('\n');
        fs::write(&p, text).map_err(|e| io(&p, e))
    }

    pub fn write_table(&self, table: &Table) -> Result<(), Failure> {
        let p = self.path.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_path(&p).map_err(|e| io(&p, e))?;
        w.write_record(&table.header).map_err(|e| io(&p, e))?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| io(&p, e))?;
        }
        w.flush().map_err(|e| io(&p, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -3.0, 1e-300, std::f64::consts::PI] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(opt(None), "");
    }
}
