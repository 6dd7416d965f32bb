//! CSV, JSON and gnuplot writers. Each path has a single writer.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{io_err, HarnessError, Result};

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json { path: path.into(), source })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })
}

/// `Some(x)` as its shortest round-trip decimal, `None` as an empty cell.
pub fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(path: PathBuf, header: &[&str]) -> Self {
        Table { path, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self) -> Result<PathBuf> {
        let err = |source| HarnessError::Csv { path: self.path.clone(), source };
        let mut w = csv::Writer::from_path(&self.path).map_err(err)?;
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        w.flush().map_err(io_err(&self.path))?;
        Ok(self.path.clone())
    }
}

/// A gnuplot script plotting `columns` (1-based, x then y) of a CSV.
pub fn write_plot_script(
    path: &Path,
    csv_name: &str,
    x: (usize, &str),
    y: (usize, &str),
    logscale_y: bool,
) -> Result<PathBuf> {
    let mut s = String::from("set datafile separator ','\nset key off\n");
    s += &format!("set xlabel '{}'\nset ylabel '{}'\n", x.1, y.1);
    if logscale_y {
        s += "set logscale y\n";
    }
    s += &format!("plot '{csv_name}' every ::1 using {}:{} with points pt 7\npause -1\n", x.0, y.0);
    fs::write(path, s).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}
