#![allow(dead_code)]

use motcom::geometry::BoundingBox;
use motcom::ingest::{ObjectState, SequenceGT};

pub fn state(frame: u32, id: u32, l: f64, t: f64, w: f64, h: f64) -> ObjectState {
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

pub fn sequence(states: Vec<ObjectState>) -> SequenceGT {
    SequenceGT::from_states("synthetic", states).unwrap()
}

/// Fraction of the integer pixels of `target` covered by any of `occluders`
/// whose bottom edge is strictly lower in the image.
pub fn raster_occlusion(target: &BoundingBox, occluders: &[BoundingBox], canvas: usize) -> f64 {
    let mut covered = vec![false; canvas * canvas];
    for o in occluders.iter().filter(|o| o.bottom() > target.bottom()) {
        for y in o.top as usize..o.bottom() as usize {
            for x in o.left as usize..o.right() as usize {
                covered[y * canvas + x] = true;
            }
        }
    }
    let mut hit = 0u64;
    let mut total = 0u64;
    for y in target.top as usize..target.bottom() as usize {
        for x in target.left as usize..target.right() as usize {
            total += 1;
            hit += u64::from(covered[y * canvas + x]);
        }
    }
    hit as f64 / total as f64
}
