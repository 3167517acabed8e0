//! Column tables written as CSV or JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Named columns of equal length; `None` marks a masked cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

/// Twelve significant digits.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.11e}")
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.map(fmt_value).unwrap_or_default()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Destination directory and format shared by every command.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
}

impl Sink {
    pub fn new(dir: impl Into<PathBuf>, format: Format) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        Ok(Self { dir, format })
    }

    pub fn path(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}.{}", self.format.extension()))
    }

    pub fn table(&self, stem: &str, table: &Table) -> Result<PathBuf> {
        let path = self.path(stem);
        write_file(&path, &table.render(self.format))?;
        Ok(path)
    }

    /// Always JSON, whatever the table format.
    pub fn json(&self, stem: &str, value: &impl Serialize) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.json"));
        write_file(&path, &serde_json::to_string_pretty(value).expect("reports serialize"))?;
        Ok(path)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    f.write_all(contents.as_bytes()).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Column label for a parameter value, e.g. `sigma_p=3`.
pub fn label(name: &str, v: f64) -> String {
    format!("{name}={v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_cells_are_empty() {
        let mut t = Table::new(vec!["q".into(), "p".into()]);
        t.push(vec![Some(1.0), None]);
        t.push(vec![Some(-0.25), Some(1e-300)]);
        assert_eq!(t.to_csv(), "q,p\n1.00000000000e0,\n-2.50000000000e-1,1.00000000000e-300\n");
        assert!(t.to_json().contains("null"));
        assert_eq!(t.column("p").unwrap(), vec![None, Some(1e-300)]);
        assert!(t.column("x").is_none());
    }

    #[test]
    fn labels_use_shortest_float() {
        assert_eq!(label("q0", 3.5), "q0=3.5");
        assert_eq!(label("E", 2.0), "E=2");
    }
}
