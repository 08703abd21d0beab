//! WebAssembly bindings for the interactive demo in `www/`.
//!
//! Every export takes flat `Float64Array`s so the page can pass canvas
//! coordinates without serialization.

use motcom::geometry::BoundingBox;
use motcom::ingest::ObjectState;
use motcom::motion::{default_unit_grid, mean_weight, track_terms};
use motcom::visual::CandidateDistances;
use wasm_bindgen::prelude::*;

fn object(frame: u32, id: u32, bbox: BoundingBox) -> ObjectState {
    ObjectState {
        frame,
        track_id: id,
        bbox,
        confidence: 1.0,
        class_id: 1,
        visibility: None,
        is_target: true,
        is_occluder: true,
    }
}

fn chunks<const N: usize>(flat: &[f64], what: &str) -> Result<Vec<[f64; N]>, String> {
    if !flat.len().is_multiple_of(N) {
        return Err(format!("{what}: expected a multiple of {N} numbers, got {}", flat.len()));
    }
    Ok(flat.chunks_exact(N).map(|c| c.try_into().expect("exact chunk")).collect())
}

/// Occlusion level of each box `[left, top, width, height]` within one frame.
pub fn occlusion_levels_of(boxes: &[f64]) -> Result<Vec<f64>, String> {
    let states: Vec<ObjectState> = chunks::<4>(boxes, "boxes")?
        .into_iter()
        .enumerate()
        .map(|(i, [l, t, w, h])| object(1, i as u32 + 1, BoundingBox::new(l, t, w, h)))
        .collect();
    states
        .iter()
        .map(|s| motcom::occlusion::occlusion_level(s, &states).map_err(|e| e.to_string()))
        .collect()
}

/// Motion score of one trajectory of centers `[x, y]` drawn with a constant
/// box side length.
#[wasm_bindgen]
pub struct MotionSummary {
    mcom: f64,
    mean_relative_error: f64,
    ratios: Vec<f64>,
}

#[wasm_bindgen]
impl MotionSummary {
    #[wasm_bindgen(getter)]
    pub fn mcom(&self) -> f64 {
        self.mcom
    }

    #[wasm_bindgen(getter)]
    pub fn mean_relative_error(&self) -> f64 {
        self.mean_relative_error
    }

    /// Per-step `error / size`, in frame order.
    #[wasm_bindgen(getter)]
    pub fn ratios(&self) -> Vec<f64> {
        self.ratios.clone()
    }
}

pub fn motion_summary_of(points: &[f64], size: f64, beta: u32) -> Result<MotionSummary, String> {
    if size.is_nan() || size <= 0.0 {
        return Err("box size must be positive".into());
    }
    if beta == 0 {
        return Err("beta must be at least 1".into());
    }
    let states: Vec<ObjectState> = chunks::<2>(points, "points")?
        .into_iter()
        .enumerate()
        .map(|(i, [x, y])| object(i as u32 + 1, 1, BoundingBox::new(x - size / 2.0, y - size / 2.0, size, size)))
        .collect();
    let track: Vec<&ObjectState> = states.iter().collect();
    let ratios: Vec<f64> = track_terms(&track, beta).into_iter().map(|t| t.ratio).collect();
    if ratios.is_empty() {
        return Err("a trajectory needs at least two points".into());
    }
    let mean_relative_error = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(MotionSummary {
        mcom: mean_weight(mean_relative_error, &default_unit_grid()),
        mean_relative_error,
        ratios,
    })
}

/// FDR at every ratio of the default grid for a target point against
/// next-frame points `[x, y]`, where `true_index` marks the real match.
pub fn fdr_curve_of(target: &[f64], candidates: &[f64], true_index: usize) -> Result<Vec<f64>, String> {
    let [target] = chunks::<2>(target, "target")?[..] else {
        return Err("target must be a single point".into());
    };
    let points = chunks::<2>(candidates, "candidates")?;
    if true_index >= points.len() {
        return Err(format!("true index {true_index} out of range for {} points", points.len()));
    }
    let as_f32 = |p: [f64; 2]| [p[0] as f32, p[1] as f32];
    let owned: Vec<[f32; 2]> = points.into_iter().map(as_f32).collect();
    let next: Vec<(u32, &[f32])> = owned.iter().enumerate().map(|(i, p)| (i as u32, &p[..])).collect();
    let profile = CandidateDistances::new(&as_f32(target), &next, true_index as u32).map_err(|e| e.to_string())?;
    Ok(default_unit_grid().into_iter().map(|r| profile.fdr(r)).collect())
}

#[wasm_bindgen]
pub fn occlusion_levels(boxes: &[f64]) -> Result<Vec<f64>, JsError> {
    occlusion_levels_of(boxes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn motion_summary(points: &[f64], size: f64, beta: u32) -> Result<MotionSummary, JsError> {
    motion_summary_of(points, size, beta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fdr_curve(target: &[f64], candidates: &[f64], true_index: usize) -> Result<Vec<f64>, JsError> {
    fdr_curve_of(target, candidates, true_index).map_err(|e| JsError::new(&e))
}

/// The ratio grid the curves are sampled on.
#[wasm_bindgen]
pub fn ratio_grid() -> Vec<f64> {
    default_unit_grid()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_box_hides_upper_one() {
        let levels = occlusion_levels_of(&[0.0, 0.0, 10.0, 10.0, 5.0, 0.0, 10.0, 20.0]).unwrap();
        assert_eq!(levels, vec![0.5, 0.0]);
        assert!(occlusion_levels_of(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn straight_line_only_pays_the_first_step() {
        let s = motion_summary_of(&[0.0, 0.0, 10.0, 0.0, 20.0, 0.0, 30.0, 0.0], 10.0, 1).unwrap();
        assert_eq!(s.ratios, vec![1.0, 0.0, 0.0]);
        assert!((s.mean_relative_error - 1.0 / 3.0).abs() < 1e-15);
        assert!(s.mcom > 0.0 && s.mcom < 1.0);
        assert!(motion_summary_of(&[1.0, 1.0], 10.0, 1).is_err());
        assert!(motion_summary_of(&[1.0, 1.0, 2.0, 2.0], 0.0, 1).is_err());
    }

    #[test]
    fn impostor_nearer_than_match() {
        let curve = fdr_curve_of(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.6], 1).unwrap();
        assert_eq!(curve.len(), 100);
        assert_eq!(curve[49], 1.0);
        assert_eq!(curve[69], 0.5);
        assert!(fdr_curve_of(&[0.0, 0.0], &[1.0, 0.0], 3).is_err());
    }
}
