//! Occlusion levels and the sequence occlusion score OCOM.
//!
//! An object is occluded by every object in the same frame whose bottom edge
//! lies strictly lower in the image (ground-plane pseudo-depth). Objects with
//! equal bottom edges do not occlude each other.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{covered_fraction, BoundingBox};
use crate::ingest::{ObjectState, SequenceGT};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionMode {
    /// Use `1 - visibility` when every target state carries a visibility value.
    #[default]
    PreferAnnotated,
    /// Always derive occlusion from box geometry.
    ForceComputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionSource {
    AnnotatedVisibility,
    ComputedIoa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOcclusion {
    pub frame: u32,
    pub track_id: u32,
    pub occlusion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionReport {
    pub ocom: f64,
    /// Mean occlusion of each target track over the frames it is present in.
    pub per_object_mean: BTreeMap<u32, f64>,
    /// Ordered by (frame, track id).
    pub per_state_occlusion: Vec<StateOcclusion>,
    pub source: OcclusionSource,
}

/// Whether `other` sits strictly nearer to the camera than `target`.
fn is_nearer(other: &BoundingBox, target: &BoundingBox) -> bool {
    other.bottom() > target.bottom()
}

/// Fraction of `target` hidden by the union of nearer occluders among `others`.
/// `others` may include `target` itself; it is skipped.
pub fn occlusion_level<'a, I>(target: &ObjectState, others: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a ObjectState>,
{
    let occluders: Vec<BoundingBox> = others
        .into_iter()
        .filter(|o| {
            o.is_occluder
                && o.frame == target.frame
                && o.track_id != target.track_id
                && is_nearer(&o.bbox, &target.bbox)
        })
        .map(|o| o.bbox)
        .collect();
    covered_fraction(&target.bbox, &occluders)
}

pub fn compute_ocom(seq: &SequenceGT, mode: OcclusionMode) -> Result<OcclusionReport> {
    let tracks = seq.target_tracks();
    if tracks.is_empty() {
        return Err(Error::NoTargets);
    }
    let annotated = mode == OcclusionMode::PreferAnnotated
        && tracks
            .iter()
            .flat_map(|(_, states)| states.iter())
            .all(|s| s.visibility.is_some());

    let (per_state, source) = if annotated {
        let levels: BTreeMap<(u32, u32), f64> = seq
            .states()
            .iter()
            .filter(|s| s.is_target)
            .map(|s| {
                let vis = s.visibility.unwrap_or(1.0);
                ((s.frame, s.track_id), (1.0 - vis).clamp(0.0, 1.0))
            })
            .collect();
        (levels, OcclusionSource::AnnotatedVisibility)
    } else {
        let frames: Vec<u32> = seq.frames().collect();
        let per_frame: Vec<Vec<((u32, u32), f64)>> = frames
            .par_iter()
            .map(|&t| {
                let present: Vec<&ObjectState> = seq.frame_states(t).collect();
                present
                    .iter()
                    .filter(|s| s.is_target)
                    .map(|s| {
                        occlusion_level(s, present.iter().copied())
                            .map(|nu| ((s.frame, s.track_id), nu))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        (
            per_frame.into_iter().flatten().collect(),
            OcclusionSource::ComputedIoa,
        )
    };

    let per_object_mean: BTreeMap<u32, f64> = tracks
        .iter()
        .map(|(id, states)| {
            let sum: f64 = states.iter().map(|s| per_state[&(s.frame, s.track_id)]).sum();
            (*id, sum / states.len() as f64)
        })
        .collect();
    let ocom = per_object_mean.values().sum::<f64>() / per_object_mean.len() as f64;

    Ok(OcclusionReport {
        ocom,
        per_object_mean,
        per_state_occlusion: per_state
            .into_iter()
            .map(|((frame, track_id), occlusion)| StateOcclusion {
                frame,
                track_id,
                occlusion,
            })
            .collect(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(frame: u32, id: u32, l: f64, t: f64, w: f64, h: f64) -> ObjectState {
        ObjectState {
            frame,
            track_id: id,
            bbox: BoundingBox::new(l, t, w, h),
            confidence: 1.0,
            class_id: 1,
            visibility: None,
            is_target: true,
            is_occluder: true,
        }
    }

    #[test]
    fn alone_is_unoccluded() {
        let s = state(1, 1, 0.0, 0.0, 10.0, 10.0);
        assert_eq!(occlusion_level(&s, [&s]).unwrap(), 0.0);
    }

    #[test]
    fn nearer_identical_box_covers_fully() {
        let target = state(1, 1, 0.0, 0.0, 10.0, 10.0);
        let front = state(1, 2, 0.0, 0.5, 10.0, 10.0);
        let big = state(1, 3, -5.0, -5.0, 20.0, 20.0);
        assert_eq!(occlusion_level(&target, [&front]).unwrap(), 0.95);
        assert_eq!(occlusion_level(&target, [&big]).unwrap(), 1.0);
        // the target is behind, so it hides nothing of the front box
        assert_eq!(occlusion_level(&front, [&target]).unwrap(), 0.0);
    }

    #[test]
    fn equal_bottoms_do_not_occlude() {
        let a = state(1, 1, 0.0, 0.0, 10.0, 10.0);
        let b = state(1, 2, 5.0, 0.0, 10.0, 10.0);
        assert_eq!(occlusion_level(&a, [&b]).unwrap(), 0.0);
        assert_eq!(occlusion_level(&b, [&a]).unwrap(), 0.0);
    }

    #[test]
    fn two_occluders_over_same_half() {
        let target = state(1, 1, 0.0, 0.0, 10.0, 10.0);
        let o1 = state(1, 2, 0.0, 0.0, 5.0, 12.0);
        let o2 = state(1, 3, -2.0, 0.0, 7.0, 11.0);
        assert_eq!(occlusion_level(&target, [&o1, &o2]).unwrap(), 0.5);
    }

    #[test]
    fn non_occluders_are_ignored() {
        let target = state(1, 1, 0.0, 0.0, 10.0, 10.0);
        let mut ghost = state(1, 2, 0.0, 0.0, 10.0, 20.0);
        ghost.is_occluder = false;
        assert_eq!(occlusion_level(&target, [&ghost]).unwrap(), 0.0);
    }

    #[test]
    fn annotated_visibility_path() {
        let mut states = Vec::new();
        for t in 1..=3 {
            let mut hidden = state(t, 1, 0.0, 0.0, 10.0, 10.0);
            hidden.visibility = Some(0.0);
            let mut open = state(t, 2, 50.0, 0.0, 10.0, 10.0);
            open.visibility = Some(1.0);
            states.extend([hidden, open]);
        }
        let seq = SequenceGT::from_states("s", states).unwrap();
        let report = compute_ocom(&seq, OcclusionMode::PreferAnnotated).unwrap();
        assert_eq!(report.source, OcclusionSource::AnnotatedVisibility);
        assert_eq!(report.ocom, 0.5);
        // geometry says nobody overlaps
        let report = compute_ocom(&seq, OcclusionMode::ForceComputed).unwrap();
        assert_eq!(report.source, OcclusionSource::ComputedIoa);
        assert_eq!(report.ocom, 0.0);
    }

    #[test]
    fn objects_weighted_equally_regardless_of_length() {
        // track 1: 1 frame fully occluded by track 3; track 2: 3 frames unoccluded
        let mut states = vec![
            state(1, 1, 0.0, 0.0, 10.0, 10.0),
            state(1, 3, 0.0, 0.0, 10.0, 20.0),
        ];
        states[1].is_target = false;
        for t in 1..=3 {
            states.push(state(t, 2, 100.0, 0.0, 10.0, 10.0));
        }
        let seq = SequenceGT::from_states("s", states).unwrap();
        let report = compute_ocom(&seq, OcclusionMode::ForceComputed).unwrap();
        assert_eq!(report.per_object_mean[&1], 1.0);
        assert_eq!(report.per_object_mean[&2], 0.0);
        assert_eq!(report.ocom, 0.5);
        assert_eq!(report.per_object_mean.len(), 2);
    }

    #[test]
    fn no_targets_is_error() {
        let mut s = state(1, 1, 0.0, 0.0, 10.0, 10.0);
        s.is_target = false;
        let seq = SequenceGT::from_states("s", vec![s]).unwrap();
        assert!(matches!(
            compute_ocom(&seq, OcclusionMode::ForceComputed),
            Err(Error::NoTargets)
        ));
    }
}
