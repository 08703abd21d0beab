//! Rank tables and correlation matrices of complexity metrics against tracker scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::summary::MetricTable;
use crate::error::{Error, Result};
use crate::rank::{compare, spearman_rho, RankComparison, ScoreTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTableRow {
    pub metric: String,
    pub score: String,
    pub comparison: RankComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major; `None` where the correlation is undefined.
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOutput {
    pub overlap: Vec<String>,
    pub rows: Vec<RankTableRow>,
    pub correlation: CorrelationMatrix,
}

/// Compares each metric column against `score_column` over the sequences
/// present in both tables.
pub fn rank_metrics(
    metrics: &MetricTable,
    scores: &ScoreTable,
    score_column: &str,
    metric_columns: &[String],
) -> Result<RankOutput> {
    let reference = scores.column(score_column)?;
    let overlap: BTreeSet<&str> = reference
        .names()
        .into_iter()
        .filter(|n| metrics.values.contains_key(*n))
        .collect();
    if overlap.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "no overlapping sequences between the metric and score tables ({} shared)",
            overlap.len()
        )));
    }
    let columns: Vec<String> = if metric_columns.is_empty() {
        metrics.columns.clone()
    } else {
        metric_columns.iter().map(|c| c.to_ascii_lowercase()).collect()
    };

    let mut rows = Vec::new();
    for column in &columns {
        let metric = metrics.column(column)?.restricted_to(&overlap);
        if metric.len() < 2 {
            log::warn!("metric column {column} has fewer than 2 values; skipped");
            continue;
        }
        if metric.len() < overlap.len() {
            log::warn!(
                "metric column {column} covers {} of {} sequences",
                metric.len(),
                overlap.len()
            );
        }
        let comparison = compare(&metric, &reference.restricted_to(&metric.names()))?;
        rows.push(RankTableRow {
            metric: column.clone(),
            score: score_column.to_ascii_lowercase(),
            comparison,
        });
    }

    let mut series: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
    for column in &columns {
        let s = metrics.column(column)?;
        series.push((
            column.clone(),
            s.entries()
                .iter()
                .filter(|(n, _)| overlap.contains(n.as_str()))
                .map(|(n, v)| (n.clone(), *v))
                .collect(),
        ));
    }
    for column in &scores.columns {
        let s = scores.column(column)?;
        series.push((
            column.clone(),
            s.entries()
                .iter()
                .filter(|(n, _)| overlap.contains(n.as_str()))
                .map(|(n, v)| (n.clone(), *v))
                .collect(),
        ));
    }
    let values = series
        .iter()
        .map(|(_, a)| {
            series
                .iter()
                .map(|(_, b)| {
                    let (xs, ys): (Vec<f64>, Vec<f64>) = a
                        .iter()
                        .filter_map(|(n, x)| b.get(n).map(|y| (*x, *y)))
                        .unzip();
                    spearman_rho(&xs, &ys).ok()
                })
                .collect()
        })
        .collect();

    Ok(RankOutput {
        overlap: overlap.into_iter().map(String::from).collect(),
        rows,
        correlation: CorrelationMatrix {
            labels: series.into_iter().map(|(l, _)| l).collect(),
            values,
        },
    })
}

/// Plain-text table: total FD, then `mean (NFD)`.
pub fn format_rank_table(output: &RankOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>3} {:>6} {:>14}", "metric", "n", "FD", "mean (NFD)");
    for row in &output.rows {
        let c = &row.comparison;
        let _ = writeln!(out, "{:<12} {:>3} {:>6} {:>14}", row.metric, c.n, c.fd, c.display());
    }
    out
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Writes `rank_table.csv` and `correlation_matrix.csv`.
pub fn write_rank_outputs(output: &RankOutput, out: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out)?;
    let table_path = out.join("rank_table.csv");
    let mut w = csv::Writer::from_path(&table_path)?;
    w.write_record(["metric", "score", "n", "fd", "fd_max", "mean_fd", "nfd", "mean_fd_nfd"])?;
    for row in &output.rows {
        let c = &row.comparison;
        w.write_record([
            row.metric.clone(),
            row.score.clone(),
            c.n.to_string(),
            c.fd.to_string(),
            c.fd_max.to_string(),
            format!("{:.6}", c.mean_fd),
            format!("{:.6}", c.nfd),
            c.display(),
        ])?;
    }
    w.flush()?;

    let matrix_path = out.join("correlation_matrix.csv");
    let mut w = csv::Writer::from_path(&matrix_path)?;
    let mut header = vec!["column".to_string()];
    header.extend(output.correlation.labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in output.correlation.labels.iter().zip(&output.correlation.values) {
        let mut record = vec![label.clone()];
        record.extend(row.iter().map(|v| cell(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok((table_path, matrix_path))
}
