//! Batch orchestration and report files: `report.json`, `summary.csv`,
//! `rank_table.csv`, `correlation_matrix.csv` and SVG plots.

mod config;
mod pipeline;
mod plot;
mod ranking;
mod summary;

pub use config::{BackendChoice, RunConfig};
pub use pipeline::{
    compute_sequence, discover_sequences, run_compute, write_outputs, Failure, Provenance,
    RunReport, SequenceReport, Timings, SCHEMA_VERSION,
};
pub use plot::{plot_metrics, scatter_svg, Scatter};
pub use ranking::{
    format_rank_table, rank_metrics, write_rank_outputs, CorrelationMatrix, RankOutput,
    RankTableRow,
};
pub use summary::{read_metric_table, write_summary, MetricTable, SummaryRow, SUMMARY_HEADER};
