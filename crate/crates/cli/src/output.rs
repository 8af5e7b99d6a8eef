use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

/// A command result in both output shapes.
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(json: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Report {
            json,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut text = serde_json::to_vec_pretty(&self.json).map_err(|e| CliError::Internal(e.to_string()))?;
                text.push(b'\n');
                Ok(text)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
                for row in &self.rows {
                    w.write_record(row).map_err(|e| CliError::Internal(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
            }
        }
    }
}

/// Writes to `path` through a temporary sibling and a rename, or to stdout.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(io)?;
            out.flush().map_err(io)
        }
        Some(path) => {
            let name = path
                .file_name()
                .ok_or_else(|| CliError::Usage(format!("output path {} has no file name", path.display())))?;
            let mut tmp_name = std::ffi::OsString::from(".");
            tmp_name.push(name);
            tmp_name.push(".tmp");
            let tmp = path.with_file_name(tmp_name);
            std::fs::write(&tmp, bytes).map_err(io)?;
            std::fs::rename(&tmp, path).map_err(|e| {
                let _ = std::fs::remove_file(&tmp);
                io(e)
            })
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn list<T: std::fmt::Display>(v: &[T]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    items.join(" ")
}
