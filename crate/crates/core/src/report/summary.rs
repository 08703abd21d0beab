use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank::{Direction, ScoredSequences};

pub const SUMMARY_HEADER: [&str; 7] = ["name", "tracks", "density", "ocom", "mcom", "vcom", "motcom"];

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub tracks: usize,
    pub density: f64,
    pub ocom: f64,
    pub mcom: f64,
    pub vcom: Option<f64>,
    pub motcom: f64,
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(SUMMARY_HEADER)?;
    for r in rows {
        writer.write_record([
            r.name.clone(),
            r.tracks.to_string(),
            r.density.to_string(),
            r.ocom.to_string(),
            r.mcom.to_string(),
            r.vcom.map(|v| v.to_string()).unwrap_or_default(),
            r.motcom.to_string(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(e.into_error()))?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Numeric columns of a summary-style CSV keyed by the first (`name`) column.
/// Blank cells are missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub columns: Vec<String>,
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
}

impl MetricTable {
    /// Column as a complexity ranking input (low is simple).
    pub fn column(&self, name: &str) -> Result<ScoredSequences> {
        if !self.columns.iter().any(|c| c == name) {
            return Err(Error::InvalidInput(format!(
                "unknown metric column {name:?}; available: {}",
                self.columns.join(", ")
            )));
        }
        let entries = self
            .values
            .iter()
            .filter_map(|(seq, cols)| cols.get(name).map(|v| (seq.clone(), *v)))
            .collect();
        ScoredSequences::new(entries, Direction::AscendingIsSimple)
    }
}

pub fn read_metric_table(path: &Path) -> Result<MetricTable> {
    let source = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    if headers.first().map(String::as_str) != Some("name") {
        return Err(Error::Format {
            path: source,
            message: "first column must be 'name'".into(),
        });
    }
    let mut values = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let name = record.get(0).unwrap_or("").to_string();
        let mut cols = BTreeMap::new();
        for (h, cell) in headers.iter().zip(record.iter()).skip(1) {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Format {
                path: source.clone(),
                message: format!("line {}: {h}: not a number: {cell:?}", i + 2),
            })?;
            cols.insert(h.clone(), v);
        }
        if values.insert(name.clone(), cols).is_some() {
            return Err(Error::Format {
                path: source.clone(),
                message: format!("duplicate sequence {name:?}"),
            });
        }
    }
    Ok(MetricTable {
        columns: headers[1..].to_vec(),
        values,
    })
}
