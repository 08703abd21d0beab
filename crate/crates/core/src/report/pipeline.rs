//! Batch computation over dataset roots.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::summary::{write_summary, SummaryRow};
use crate::combiner::{combine, MeanKind, MotcomScore, SubScores, Weights};
use crate::embedder::{BlurSpec, EmbeddingBackend};
use crate::error::{Error, Result};
use crate::ingest::{load_sequence, TargetFilter};
use crate::motion::{compute_mcom, MotionReport};
use crate::occlusion::{compute_ocom, OcclusionMode, OcclusionReport};
use crate::visual::{compute_vcom, EmbeddingCache, ImageDirFrames, VisualReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_ms: f64,
    pub occlusion_ms: f64,
    pub motion_ms: f64,
    pub visual_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub name: String,
    pub path: PathBuf,
    pub frame_count: u32,
    /// |K|
    pub track_count: usize,
    /// Mean number of targets per frame.
    pub density: f64,
    pub occlusion: OcclusionReport,
    pub motion: MotionReport,
    pub visual: Option<VisualReport>,
    pub motcom: MotcomScore,
    pub timings: Timings,
}

impl SequenceReport {
    pub fn summary_row(&self) -> SummaryRow {
        SummaryRow {
            name: self.name.clone(),
            tracks: self.track_count,
            density: self.density,
            ocom: self.occlusion.ocom,
            mcom: self.motion.mcom,
            vcom: self.visual.as_ref().map(|v| v.vcom),
            motcom: self.motcom.motcom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub sequence: String,
    pub path: PathBuf,
    pub reason: String,
}

/// Settings every score in a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub weights: Weights,
    pub mean_kind: MeanKind,
    pub occlusion_mode: OcclusionMode,
    pub beta: u32,
    pub alpha_set_size: usize,
    pub ratio_set_size: usize,
    pub blur: BlurSpec,
    pub vcom_enabled: bool,
    pub backend: Option<String>,
    pub embedding_dimension: Option<usize>,
    pub filter: TargetFilter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub sequences: Vec<SequenceReport>,
    pub failures: Vec<Failure>,
}

impl RunReport {
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        self.sequences.iter().map(SequenceReport::summary_row).collect()
    }
}

fn dir_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn is_sequence_dir(path: &Path) -> bool {
    path.join("gt").join("gt.txt").is_file()
}

fn collect_sequences(dir: &Path, depth: usize, out: &mut Vec<PathBuf>) -> Result<()> {
    if is_sequence_dir(dir) {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    if depth == 0 {
        return Ok(());
    }
    let mut children: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    children.sort();
    for child in children {
        collect_sequences(&child, depth - 1, out)?;
    }
    Ok(())
}

/// Sequence directories (those holding `gt/gt.txt`) under each root, up to
/// three levels deep, filtered by name globs and sorted by name.
pub fn discover_sequences(roots: &[PathBuf], include: &[String], exclude: &[String]) -> Result<Vec<PathBuf>> {
    let compile = |patterns: &[String]| -> Result<Vec<glob::Pattern>> {
        patterns
            .iter()
            .map(|p| glob::Pattern::new(p).map_err(|e| Error::Config(format!("{p:?}: {e}"))))
            .collect()
    };
    let (include, exclude) = (compile(include)?, compile(exclude)?);
    let mut found = Vec::new();
    for root in roots {
        if !root.is_dir() {
            return Err(Error::NoSequences(root.display().to_string()));
        }
        collect_sequences(root, 3, &mut found)?;
    }
    found.retain(|p| {
        let name = dir_name(p);
        (include.is_empty() || include.iter().any(|g| g.matches(&name)))
            && !exclude.iter().any(|g| g.matches(&name))
    });
    found.sort_by(|a, b| dir_name(a).cmp(&dir_name(b)).then_with(|| a.cmp(b)));
    if found.is_empty() {
        let roots: Vec<String> = roots.iter().map(|r| r.display().to_string()).collect();
        return Err(Error::NoSequences(roots.join(", ")));
    }
    Ok(found)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Loads one sequence directory and computes all of its scores.
pub fn compute_sequence(
    dir: &Path,
    cfg: &RunConfig,
    backend: Option<&dyn EmbeddingBackend>,
) -> Result<SequenceReport> {
    let start = Instant::now();
    let seq = load_sequence(dir, &cfg.filter)?;
    let load_ms = millis(start);

    let start = Instant::now();
    let occlusion = compute_ocom(&seq, cfg.occlusion)?;
    let occlusion_ms = millis(start);

    let start = Instant::now();
    let motion = compute_mcom(&seq, &cfg.motion)?;
    let motion_ms = millis(start);

    let (visual, visual_ms) = match backend.filter(|_| cfg.compute_vcom) {
        None => (None, None),
        Some(backend) => {
            let start = Instant::now();
            let cache_path = cfg
                .out
                .join("cache")
                .join(format!("{}.{}.json", seq.name(), backend.name().replace([':', '/'], "_")));
            let cache = if cfg.cache {
                Some(EmbeddingCache::open(&cache_path, seq.name(), backend)?)
            } else {
                None
            };
            let report = compute_vcom(&seq, &cfg.visual, backend, &ImageDirFrames(&seq), cache.as_ref())?;
            if let Some(cache) = &cache {
                cache.save(&cache_path)?;
            }
            (Some(report), Some(millis(start)))
        }
    };

    let motcom = combine(
        SubScores {
            ocom: occlusion.ocom,
            mcom: motion.mcom,
            vcom: visual.as_ref().map(|v| v.vcom),
        },
        cfg.weights,
        cfg.mean,
    )?;
    Ok(SequenceReport {
        name: seq.name().to_string(),
        path: dir.to_path_buf(),
        frame_count: seq.frame_count(),
        track_count: seq.target_count(),
        density: seq.density(),
        occlusion,
        motion,
        visual,
        motcom,
        timings: Timings {
            load_ms,
            occlusion_ms,
            motion_ms,
            visual_ms,
        },
    })
}

/// Computes every discovered sequence on a bounded pool. Failures are
/// collected per sequence rather than aborting the run.
pub fn run_compute(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let dirs = discover_sequences(&cfg.data, &cfg.include, &cfg.exclude)?;
    let backend = if cfg.compute_vcom {
        Some(cfg.backend()?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<(PathBuf, Result<SequenceReport>)> = pool.install(|| {
        dirs.par_iter()
            .map(|dir| {
                let r = compute_sequence(dir, cfg, backend.as_deref());
                (dir.clone(), r)
            })
            .collect()
    });

    let mut sequences = Vec::new();
    let mut failures = Vec::new();
    for (dir, result) in results {
        match result {
            Ok(report) => sequences.push(report),
            Err(e) => {
                log::error!("{}: {e}", dir.display());
                failures.push(Failure {
                    sequence: dir_name(&dir),
                    path: dir,
                    reason: e.to_string(),
                });
            }
        }
    }
    sequences.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.path.cmp(&b.path)));
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            weights: cfg.weights,
            mean_kind: cfg.mean,
            occlusion_mode: cfg.occlusion,
            beta: cfg.motion.beta,
            alpha_set_size: cfg.motion.alpha_set.len(),
            ratio_set_size: cfg.visual.ratio_set.len(),
            blur: cfg.visual.blur,
            vcom_enabled: cfg.compute_vcom,
            backend: backend.as_ref().map(|b| b.name().to_string()),
            embedding_dimension: backend.as_ref().map(|b| b.dimension()),
            filter: cfg.filter.clone(),
        },
        sequences,
        failures,
    })
}

/// Writes `report.json` and `summary.csv` into `out`.
pub fn write_outputs(report: &RunReport, out: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out)?;
    let json = out.join("report.json");
    fs::write(&json, serde_json::to_vec_pretty(report)?)?;
    let csv = out.join("summary.csv");
    write_summary(&csv, &report.summary_rows())?;
    Ok((json, csv))
}
