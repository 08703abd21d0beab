//! Dataset complexity metrics for multi-object tracking sequences.
//!
//! Three sub-metrics are computed from ground-truth annotations:
//! [`occlusion`] (OCOM), [`motion`] (MCOM) and [`visual`] (VCOM), which
//! [`combiner`] fuses into a single MOTCOM score. [`rank`] compares how well a
//! metric orders sequences against tracker performance.

pub mod combiner;
pub mod embedder;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod motion;
pub mod occlusion;
pub mod rank;
pub mod report;
pub mod visual;

pub use error::{Error, Result};
