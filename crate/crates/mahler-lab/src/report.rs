//! Run reports and their JSON and CSV serializations.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// The whole report as pretty-printed JSON.
    Json,
    /// The report's table as CSV.
    Csv,
}

/// A header and rows of numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    /// Column names.
    pub header: Vec<String>,
    /// Rows, each as long as the header.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Table from any serializable row type whose fields are numbers.
    pub fn from_rows<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Self, CliError> {
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let value = serde_json::to_value(row).map_err(|e| CliError::Io(e.to_string()))?;
            let mut cells = Vec::with_capacity(header.len());
            for h in header {
                let cell = value.get(h).and_then(|v| v.as_f64()).ok_or_else(|| CliError::Io(format!("missing column {h}")))?;
                cells.push(cell);
            }
            out.push(cells);
        }
        Ok(Table { header: header.iter().map(|h| h.to_string()).collect(), rows: out })
    }
}

/// Everything a run produces, minus wall time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    /// Subcommand and flags as given.
    pub command: Vec<String>,
    /// SHA-256 of the body file, hex encoded.
    pub input_digest: String,
    /// `(n_alpha, n_beta)` of the quadrature grid.
    pub grid: [usize; 2],
    /// Quadrature nodes per curve.
    pub curve: usize,
    /// Version of this tool.
    pub version: String,
    /// Numeric results.
    pub results: serde_json::Value,
    /// Tabular results, for CSV output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

/// Hex-encoded SHA-256 digest.
pub fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn render(report: &RunReport, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            Ok(text.into_bytes())
        }
        Format::Csv => {
            let table = report.table.as_ref().ok_or_else(|| CliError::Io("report has no table".into()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).map_err(|e| CliError::Io(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row.iter().map(|x| x.to_string())).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Writes a report to `path`, or to standard output when `path` is `None`.
pub fn emit_report(report: &RunReport, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(&bytes).map_err(CliError::from),
    }
}
