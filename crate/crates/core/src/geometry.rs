//! Axis-aligned box geometry in image pixel coordinates (y grows downwards).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A box stored the way MOTChallenge files store it: top-left corner plus size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self {
            left,
            top,
            width,
            height,
        }
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn center(&self) -> (f64, f64) {
        (self.left + self.width / 2.0, self.top + self.height / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width > 0.0 && self.height > 0.0)
    }

    /// Overlapping region, `None` when the boxes only touch or are disjoint.
    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let left = self.left.max(other.left);
        let top = self.top.max(other.top);
        let right = self.right().min(other.right());
        let bottom = self.bottom().min(other.bottom());
        (right > left && bottom > top).then(|| BoundingBox::new(left, top, right - left, bottom - top))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BoundingBox {
        BoundingBox::new(self.left + dx, self.top + dy, self.width, self.height)
    }

    pub fn scaled(&self, factor: f64) -> BoundingBox {
        BoundingBox::new(
            self.left * factor,
            self.top * factor,
            self.width * factor,
            self.height * factor,
        )
    }
}

/// Area of `target` covered by `other`, divided by the area of `target`.
pub fn intersection_over_area(target: &BoundingBox, other: &BoundingBox) -> Result<f64> {
    if target.is_degenerate() {
        return Err(Error::DegenerateBox(format!("{target:?}")));
    }
    let covered = target.intersection(other).map_or(0.0, |b| b.area());
    Ok((covered / target.area()).clamp(0.0, 1.0))
}

/// Fraction of `target` covered by the union of `occluders`.
///
/// The union is computed exactly with a sweep over the distinct x edges of the
/// clipped occluders, merging y intervals inside each vertical slab, so
/// overlapping occluders are never counted twice.
pub fn covered_fraction<'a, I>(target: &BoundingBox, occluders: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a BoundingBox>,
{
    if target.is_degenerate() {
        return Err(Error::DegenerateBox(format!("{target:?}")));
    }
    let clipped: Vec<BoundingBox> = occluders
        .into_iter()
        .filter_map(|o| target.intersection(o))
        .collect();
    Ok((union_area(&clipped) / target.area()).clamp(0.0, 1.0))
}

/// Exact area of a union of axis-aligned boxes.
pub fn union_area(boxes: &[BoundingBox]) -> f64 {
    if boxes.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.left, b.right()]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(boxes.len());
    let mut total = 0.0;
    for slab in xs.windows(2) {
        let (x0, x1) = (slab[0], slab[1]);
        spans.clear();
        spans.extend(
            boxes
                .iter()
                .filter(|b| b.left <= x0 && b.right() >= x1)
                .map(|b| (b.top, b.bottom())),
        );
        if spans.is_empty() {
            continue;
        }
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut covered = 0.0;
        let (mut start, mut end) = spans[0];
        for &(s, e) in &spans[1..] {
            if s > end {
                covered += end - start;
                start = s;
                end = e;
            } else if e > end {
                end = e;
            }
        }
        covered += end - start;
        total += covered * (x1 - x0);
    }
    total
}
