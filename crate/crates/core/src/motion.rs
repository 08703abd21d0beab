//! Erratic-motion score MCOM.
//!
//! Each target is predicted one temporal step ahead with a constant-velocity
//! model; the prediction error relative to the object's size at the predicted
//! frame is averaged over all tracks and mapped into `[0, 1)` by
//! `g(x, a) = x / (x + a)`, averaged over a set of `a` values.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ObjectState, SequenceGT};

pub type Point = (f64, f64);

/// `{0.01, 0.02, ..., 1.00}`
pub fn default_unit_grid() -> Vec<f64> {
    (1..=100).map(|i| f64::from(i) / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionConfig {
    /// Temporal step in frames.
    pub beta: u32,
    pub alpha_set: Vec<f64>,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            beta: 1,
            alpha_set: default_unit_grid(),
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta < 1 {
            return Err(Error::Config("beta must be at least 1".into()));
        }
        if self.alpha_set.is_empty() {
            return Err(Error::Config("alpha set is empty".into()));
        }
        if let Some(a) = self.alpha_set.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Config(format!("alpha {a} is not positive")));
        }
        Ok(())
    }
}

/// One size-compensated prediction error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTerm {
    pub frame: u32,
    /// Frame the prediction is checked against (`frame + beta`, capped).
    pub target_frame: u32,
    pub error: f64,
    pub size: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionReport {
    pub mcom: f64,
    /// Mean of `error / size` over the evaluated terms; the argument of `g`.
    pub mean_relative_error: f64,
    /// Same sum divided by the total number of target states instead.
    pub mean_relative_error_per_state: f64,
    pub evaluated_term_count: usize,
    pub target_state_count: usize,
    pub per_track_terms: BTreeMap<u32, Vec<MotionTerm>>,
}

fn position(s: &ObjectState) -> Point {
    s.center()
}

fn index_of(track: &[&ObjectState], frame: u32) -> Result<usize> {
    track
        .binary_search_by_key(&frame, |s| s.frame)
        .map_err(|_| Error::InvalidInput(format!("object not present at frame {frame}")))
}

/// Index of the state `beta` frames before `track[i]`. When the object is absent
/// there, the latest earlier presence is used, and the first frame when the
/// step reaches before the start of the trajectory.
fn reference_index(track: &[&ObjectState], i: usize, beta: u32) -> Option<usize> {
    if i == 0 {
        return None;
    }
    let wanted = i64::from(track[i].frame) - i64::from(beta);
    let before = track[..i].partition_point(|s| i64::from(s.frame) <= wanted);
    Some(before.saturating_sub(1))
}

/// Index of the state `beta` frames after `track[i]`, capped symmetrically to
/// the earliest later presence, or the last frame of the trajectory.
fn target_index(track: &[&ObjectState], i: usize, beta: u32) -> Option<usize> {
    if i + 1 >= track.len() {
        return None;
    }
    let wanted = u64::from(track[i].frame) + u64::from(beta);
    let later = &track[i + 1..];
    let offset = later.partition_point(|s| u64::from(s.frame) < wanted);
    Some(i + 1 + offset.min(later.len() - 1))
}

/// Displacement of the track at `frame` relative to `beta` frames earlier.
/// Zero at the first frame of the trajectory.
pub fn displacement(track: &[&ObjectState], frame: u32, beta: u32) -> Result<Point> {
    let i = index_of(track, frame)?;
    Ok(match reference_index(track, i, beta) {
        None => (0.0, 0.0),
        Some(j) => {
            let (now, then) = (position(track[i]), position(track[j]));
            (now.0 - then.0, now.1 - then.1)
        }
    })
}

/// Constant-velocity prediction.
pub fn predict_position(position: Point, displacement: Point) -> Point {
    (position.0 + displacement.0, position.1 + displacement.1)
}

pub fn prediction_error(truth: Point, predicted: Point) -> f64 {
    (truth.0 - predicted.0).hypot(truth.1 - predicted.1)
}

/// `sqrt(w * h)` of the state at the predicted frame.
pub fn transformed_size(next: &ObjectState) -> f64 {
    next.size()
}

/// `x / (x + alpha)`; reaches 0.5 at `x = alpha`.
pub fn log_sigmoid_weight(x: f64, alpha: f64) -> f64 {
    debug_assert!(x >= 0.0 && alpha > 0.0);
    x / (x + alpha)
}

/// Mean of `g(x, alpha)` over `alphas`.
pub fn mean_weight(x: f64, alphas: &[f64]) -> f64 {
    alphas.iter().map(|&a| log_sigmoid_weight(x, a)).sum::<f64>() / alphas.len() as f64
}

/// All evaluable prediction terms of one track (states in frame order).
pub fn track_terms(track: &[&ObjectState], beta: u32) -> Vec<MotionTerm> {
    (0..track.len())
        .filter_map(|i| {
            let next = target_index(track, i, beta)?;
            let shift = match reference_index(track, i, beta) {
                None => (0.0, 0.0),
                Some(j) => {
                    let (now, then) = (position(track[i]), position(track[j]));
                    (now.0 - then.0, now.1 - then.1)
                }
            };
            let predicted = predict_position(position(track[i]), shift);
            let error = prediction_error(position(track[next]), predicted);
            let size = transformed_size(track[next]);
            Some(MotionTerm {
                frame: track[i].frame,
                target_frame: track[next].frame,
                error,
                size,
                ratio: error / size,
            })
        })
        .collect()
}

pub fn compute_mcom(seq: &SequenceGT, cfg: &MotionConfig) -> Result<MotionReport> {
    cfg.validate()?;
    let tracks = seq.target_tracks();
    let per_track_terms: BTreeMap<u32, Vec<MotionTerm>> = tracks
        .par_iter()
        .map(|(id, states)| (*id, track_terms(states, cfg.beta)))
        .collect();

    let evaluated_term_count: usize = per_track_terms.values().map(Vec::len).sum();
    if evaluated_term_count == 0 {
        return Err(Error::MotionUndefined);
    }
    let target_state_count: usize = tracks.iter().map(|(_, s)| s.len()).sum();
    let total: f64 = per_track_terms
        .values()
        .map(|terms| terms.iter().map(|t| t.ratio).sum::<f64>())
        .sum();
    let mean_relative_error = total / evaluated_term_count as f64;

    Ok(MotionReport {
        mcom: mean_weight(mean_relative_error, &cfg.alpha_set),
        mean_relative_error,
        mean_relative_error_per_state: total / target_state_count as f64,
        evaluated_term_count,
        target_state_count,
        per_track_terms,
    })
}
