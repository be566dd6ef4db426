// SPDX-License-Identifier: Apache-2.0

//! Buffered CSV/JSON artifacts. Nothing touches the disk until a command
//! has finished, so a failed run leaves no partial files behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// CSV tables plus a JSON summary.
    #[default]
    Csv,
    /// JSON only; tables are embedded in the summary.
    Json,
}

/// Every JSON artifact: tool identity, the command, the resolved config and
/// the command's result, in that order.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub result: T,
}

/// A table kept as header plus numeric rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| number(*v))).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Shortest round-trip text, switching to exponent form for very small or
/// large magnitudes.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e7).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn csv(&mut self, name: impl Into<PathBuf>, table: &Table) -> Result<(), CliError> {
        self.files.push((name.into(), table.to_csv()?));
        Ok(())
    }

    pub fn json<T: Serialize>(
        &mut self,
        name: impl Into<PathBuf>,
        command: &str,
        config: &RunConfig,
        result: T,
    ) -> Result<(), CliError> {
        let env = Envelope { tool: TOOL, version: VERSION, command, config, result };
        let mut text = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
        text.push(b'\n');
        self.files.push((name.into(), text));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Create `dir` and write every file into it.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.5, -307.25, 1e-30, 6.02e23, 9.4056e9, 1.0 / 3.0] {
            let s = number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(number(12.5), "12.5");
        assert_eq!(number(1e-30), "1e-30");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new(&["field_mT", "amplitude"]);
        t.push(vec![250.0, -0.5]);
        t.push(vec![250.1, 1e-9]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "field_mT,amplitude\n250,-0.5\n250.1,1e-9\n");
    }
}
