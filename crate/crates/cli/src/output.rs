//! Report tables written as CSV, whitespace-separated `.dat` or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// A table with a fixed column set and `#` comment lines above the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub comments: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, comments: Vec<String>, columns: &[&'static str]) -> Self {
        Table {
            name: name.to_string(),
            comments,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Solver(format!("csv encoding: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Solver(format!("csv encoding: {e}")))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    /// Gnuplot-ready text: comments and header behind `#`, blank-separated columns.
    pub fn to_dat(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str(&format!("# {}\n", self.columns.join(" ")));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| if c.is_empty() { "-".into() } else { c.replace(' ', "_") }).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Writes report files into one directory.
pub struct Writer {
    dir: PathBuf,
    formats: Vec<Format>,
}

impl Writer {
    pub fn create(dir: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("output directory {}", dir.display()), e))?;
        let probe = dir.join(".collapse-lab-write-test");
        fs::write(&probe, b"").map_err(|e| CliError::io(&format!("output directory {} is not writable", dir.display()), e))?;
        let _ = fs::remove_file(probe);
        Ok(Writer {
            dir: dir.to_path_buf(),
            formats: formats.to_vec(),
        })
    }

    fn write(&self, file: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(file);
        fs::write(&path, text).map_err(|e| CliError::io(&format!("writing {}", path.display()), e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn table(&self, t: &Table) -> Result<(), CliError> {
        if self.formats.contains(&Format::Csv) {
            self.write(&format!("{}.csv", t.name), &t.to_csv()?)?;
        }
        if self.formats.contains(&Format::Dat) {
            self.write(&format!("{}.dat", t.name), &t.to_dat())?;
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        if self.formats.contains(&Format::Json) {
            let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Solver(format!("json encoding: {e}")))?;
            text.push('\n');
            self.write(&format!("{name}.json"), &text)?;
        }
        Ok(())
    }
}

/// Fixed-width scientific notation, so reruns compare byte for byte.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}
