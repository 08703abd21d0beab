//! Spatially aware visual-similarity score VCOM.
//!
//! For a target in frame `t`, every target of frame `t + 1` within
//! `d(r) = d_nn + d_nn * r` of it in embedding space is a candidate; the
//! candidate sharing the target's identity is the true positive and all others
//! are false positives. VCOM averages the resulting false discovery rate over
//! targets, frames and the ratio set.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedder::{euclidean, BlurSpec, EmbeddingBackend, FeatureVector, FocusFrame};
use crate::embedder::embed_focused;
use crate::error::{Error, Result};
use crate::ingest::{frame_image_path, ObjectState, SequenceGT};
use crate::motion::default_unit_grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisualConfig {
    pub ratio_set: Vec<f64>,
    pub blur: BlurSpec,
}

impl Default for VisualConfig {
    fn default() -> Self {
        Self {
            ratio_set: default_unit_grid(),
            blur: BlurSpec::default(),
        }
    }
}

impl VisualConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ratio_set.is_empty() {
            return Err(Error::Config("ratio set is empty".into()));
        }
        if let Some(r) = self.ratio_set.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Config(format!("ratio {r} is not positive")));
        }
        self.blur.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualReport {
    pub vcom: f64,
    /// Per contributing frame: the FDR averaged over its targets and the ratio set.
    pub per_frame_mean_fdr: BTreeMap<u32, f64>,
    /// Targets without a ground-truth match in the next frame.
    pub skipped_targets: usize,
    pub evaluated_targets: usize,
}

/// Search radius around the target embedding.
pub fn radius(d_nn: f64, r: f64) -> f64 {
    d_nn + d_nn * r
}

/// Distances from one target embedding to every next-frame embedding.
#[derive(Debug, Clone)]
pub struct CandidateDistances {
    sorted: Vec<f64>,
    true_match: f64,
}

impl CandidateDistances {
    pub fn new(target: &[f32], next: &[(u32, &[f32])], target_id: u32) -> Result<Self> {
        if next.is_empty() {
            return Err(Error::InvalidInput("next frame holds no objects".into()));
        }
        let mut true_match = None;
        let mut sorted: Vec<f64> = next
            .iter()
            .map(|(id, v)| {
                let d = euclidean(target, v);
                if *id == target_id {
                    true_match = Some(d);
                }
                d
            })
            .collect();
        let true_match = true_match.ok_or_else(|| {
            Error::InvalidInput(format!("track {target_id} is absent from the next frame"))
        })?;
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted, true_match })
    }

    pub fn nearest(&self) -> f64 {
        self.sorted[0]
    }

    /// Number of embeddings within `d(r)`, ties at the boundary included.
    pub fn candidates(&self, r: f64) -> usize {
        let limit = radius(self.nearest(), r);
        self.sorted.partition_point(|&d| d <= limit)
    }

    pub fn fdr(&self, r: f64) -> f64 {
        let limit = radius(self.nearest(), r);
        let candidates = self.candidates(r);
        let tp = usize::from(self.true_match <= limit);
        (candidates - tp) as f64 / candidates as f64
    }
}

/// FDR of one target against the objects of the next frame.
pub fn fdr_for_target(
    target: &FeatureVector,
    next_frame: &[FeatureVector],
    target_id: u32,
    r: f64,
) -> Result<f64> {
    let next: Vec<(u32, &[f32])> = next_frame
        .iter()
        .map(|v| (v.track_id, v.values.as_slice()))
        .collect();
    Ok(CandidateDistances::new(&target.values, &next, target_id)?.fdr(r))
}

/// Supplies decoded frames by index.
pub trait FrameSource: Sync {
    fn frame(&self, frame: u32) -> Result<RgbImage>;
}

/// Frames read from a sequence's image directory.
pub struct ImageDirFrames<'a>(pub &'a SequenceGT);

impl FrameSource for ImageDirFrames<'_> {
    fn frame(&self, frame: u32) -> Result<RgbImage> {
        let path = frame_image_path(self.0, frame)?;
        Ok(image::open(path)?.to_rgb8())
    }
}

impl FrameSource for BTreeMap<u32, RgbImage> {
    fn frame(&self, frame: u32) -> Result<RgbImage> {
        self.get(&frame).cloned().ok_or_else(|| Error::MissingFrame {
            frame,
            dir: "<memory>".into(),
        })
    }
}

pub type EmbeddingMap = BTreeMap<(u32, u32), Vec<f32>>;

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    frame: u32,
    id: u32,
    vector: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    sequence: String,
    backend: String,
    dimension: usize,
    records: Vec<CacheRecord>,
}

/// Embeddings keyed by (frame, track id), shareable between worker threads.
///
/// On disk it is a JSON object `{sequence, backend, dimension, records}` where
/// each record is `{frame, id, vector}`.
#[derive(Debug)]
pub struct EmbeddingCache {
    sequence: String,
    backend: String,
    dimension: usize,
    entries: Mutex<EmbeddingMap>,
}

impl EmbeddingCache {
    pub fn new(sequence: &str, backend: &dyn EmbeddingBackend) -> Self {
        Self {
            sequence: sequence.to_string(),
            backend: backend.name().to_string(),
            dimension: backend.dimension(),
            entries: Mutex::new(BTreeMap::new()),
        }
    }

    /// Loads `path` when it exists and matches the sequence and backend,
    /// otherwise starts empty.
    pub fn open(path: &Path, sequence: &str, backend: &dyn EmbeddingBackend) -> Result<Self> {
        let fresh = Self::new(sequence, backend);
        if !path.is_file() {
            return Ok(fresh);
        }
        let file: CacheFile = serde_json::from_slice(&fs::read(path)?)?;
        if file.sequence != fresh.sequence
            || file.backend != fresh.backend
            || file.dimension != fresh.dimension
        {
            log::warn!(
                "{}: cache was built for {}/{} ({} dims); ignoring it",
                path.display(),
                file.sequence,
                file.backend,
                file.dimension
            );
            return Ok(fresh);
        }
        let entries = file
            .records
            .into_iter()
            .filter(|r| r.vector.len() == fresh.dimension)
            .map(|r| ((r.frame, r.id), r.vector))
            .collect();
        Ok(Self {
            entries: Mutex::new(entries),
            ..fresh
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let entries = self.entries.lock().expect("cache lock poisoned");
        let file = CacheFile {
            sequence: self.sequence.clone(),
            backend: self.backend.clone(),
            dimension: self.dimension,
            records: entries
                .iter()
                .map(|(&(frame, id), v)| CacheRecord {
                    frame,
                    id,
                    vector: v.clone(),
                })
                .collect(),
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, serde_json::to_vec(&file)?)?;
        Ok(())
    }

    pub fn get(&self, frame: u32, track_id: u32) -> Option<Vec<f32>> {
        self.entries
            .lock()
            .expect("cache lock poisoned")
            .get(&(frame, track_id))
            .cloned()
    }

    /// Keeps an existing entry; returns the stored vector.
    pub fn insert(&self, frame: u32, track_id: u32, vector: Vec<f32>) -> Vec<f32> {
        self.entries
            .lock()
            .expect("cache lock poisoned")
            .entry((frame, track_id))
            .or_insert(vector)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Frames `t` whose successor `t + 1` holds targets, with the targets of `t`
/// that reappear in `t + 1`.
struct FramePairs {
    pairs: Vec<(u32, Vec<u32>)>,
    skipped: usize,
}

fn frame_pairs(seq: &SequenceGT) -> FramePairs {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for t in seq.frames() {
        let here: Vec<u32> = seq.frame_targets(t).map(|s| s.track_id).collect();
        if here.is_empty() {
            continue;
        }
        let next: BTreeSet<u32> = seq.frame_targets(t + 1).map(|s| s.track_id).collect();
        let (matched, missing): (Vec<u32>, Vec<u32>) =
            here.into_iter().partition(|id| next.contains(id));
        skipped += missing.len();
        if !matched.is_empty() {
            pairs.push((t, matched));
        }
    }
    FramePairs { pairs, skipped }
}

/// Target states whose embeddings the score needs, grouped by frame.
fn required_states(seq: &SequenceGT) -> BTreeMap<u32, Vec<&ObjectState>> {
    let mut needed: BTreeMap<u32, Vec<&ObjectState>> = BTreeMap::new();
    let mut frames = BTreeSet::new();
    for (t, _) in frame_pairs(seq).pairs {
        frames.insert(t);
        frames.insert(t + 1);
    }
    for t in frames {
        needed.insert(t, seq.frame_targets(t).collect());
    }
    needed
}

/// Embeds every target state the score needs, reusing `cache` entries.
pub fn embed_sequence(
    seq: &SequenceGT,
    blur: &BlurSpec,
    backend: &dyn EmbeddingBackend,
    frames: &dyn FrameSource,
    cache: Option<&EmbeddingCache>,
) -> Result<EmbeddingMap> {
    let needed = required_states(seq);
    let per_frame: Vec<Vec<((u32, u32), Vec<f32>)>> = needed
        .par_iter()
        .map(|(&t, states)| {
            let cached: Vec<Option<Vec<f32>>> = states
                .iter()
                .map(|s| cache.and_then(|c| c.get(t, s.track_id)))
                .collect();
            if cached.iter().all(Option::is_some) {
                return Ok(states
                    .iter()
                    .zip(cached)
                    .map(|(s, v)| ((t, s.track_id), v.expect("checked above")))
                    .collect());
            }
            let image = frames.frame(t)?;
            let focus = FocusFrame::new(&image, blur)?;
            states
                .iter()
                .zip(cached)
                .map(|(s, hit)| {
                    let vector = match hit {
                        Some(v) => v,
                        None => {
                            let focused = focus.focus(&s.bbox).map_err(|source| Error::Embedding {
                                frame: t,
                                track_id: s.track_id,
                                source: Box::new(source),
                            })?;
                            let v = embed_focused(&focused, s, backend)?.values;
                            match cache {
                                Some(c) => c.insert(t, s.track_id, v),
                                None => v,
                            }
                        }
                    };
                    Ok(((t, s.track_id), vector))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_frame.into_iter().flatten().collect())
}

/// VCOM from precomputed embeddings keyed by (frame, track id).
pub fn vcom_from_embeddings(
    seq: &SequenceGT,
    ratio_set: &[f64],
    embeddings: &EmbeddingMap,
) -> Result<VisualReport> {
    if ratio_set.is_empty() {
        return Err(Error::Config("ratio set is empty".into()));
    }
    let lookup = |t: u32, id: u32| -> Result<&[f32]> {
        embeddings
            .get(&(t, id))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("no embedding for frame {t}, track {id}")))
    };
    let FramePairs { pairs, skipped } = frame_pairs(seq);
    if pairs.is_empty() {
        return Err(Error::NoFramePairs);
    }

    // frame_means[f][r]: mean FDR over the targets of contributing frame f at ratio r
    let mut frame_means: Vec<(u32, Vec<f64>)> = Vec::with_capacity(pairs.len());
    let mut evaluated_targets = 0;
    for (t, matched) in &pairs {
        let next: Vec<(u32, &[f32])> = seq
            .frame_targets(t + 1)
            .map(|s| Ok((s.track_id, lookup(t + 1, s.track_id)?)))
            .collect::<Result<_>>()?;
        let mut sums = vec![0.0; ratio_set.len()];
        for &id in matched {
            let profile = CandidateDistances::new(lookup(*t, id)?, &next, id)?;
            for (sum, &r) in sums.iter_mut().zip(ratio_set) {
                *sum += profile.fdr(r);
            }
        }
        evaluated_targets += matched.len();
        let n = matched.len() as f64;
        frame_means.push((*t, sums.into_iter().map(|s| s / n).collect()));
    }

    let frames = frame_means.len() as f64;
    let vcom = (0..ratio_set.len())
        .map(|ri| frame_means.iter().map(|(_, m)| m[ri]).sum::<f64>() / frames)
        .sum::<f64>()
        / ratio_set.len() as f64;
    let per_frame_mean_fdr = frame_means
        .into_iter()
        .map(|(t, m)| (t, m.iter().sum::<f64>() / m.len() as f64))
        .collect();
    Ok(VisualReport {
        vcom,
        per_frame_mean_fdr,
        skipped_targets: skipped,
        evaluated_targets,
    })
}

pub fn compute_vcom(
    seq: &SequenceGT,
    cfg: &VisualConfig,
    backend: &dyn EmbeddingBackend,
    frames: &dyn FrameSource,
    cache: Option<&EmbeddingCache>,
) -> Result<VisualReport> {
    cfg.validate()?;
    if frame_pairs(seq).pairs.is_empty() {
        return Err(Error::NoFramePairs);
    }
    let embeddings = embed_sequence(seq, &cfg.blur, backend, frames, cache)?;
    vcom_from_embeddings(seq, &cfg.ratio_set, &embeddings)
}
