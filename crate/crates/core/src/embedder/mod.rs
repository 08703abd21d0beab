//! Per-object appearance embeddings: the frame is blurred everywhere except the
//! object's box and the whole frame is passed to an embedding backend.

mod blur;
mod grid;
#[cfg(feature = "onnx")]
mod onnx;

use std::sync::Arc;

use image::RgbImage;
use serde::{Deserialize, Serialize};

pub use blur::{blur_except_box, gaussian_blur, pixel_region, BlurSpec, FocusFrame};
pub use grid::{test_backend, GridBackend};
#[cfg(feature = "onnx")]
pub use onnx::{onnx_backend, ModelMetadata, OnnxBackend};

use crate::error::{Error, Result};
use crate::ingest::ObjectState;

/// Maps a full frame to a fixed-length feature vector.
///
/// Implementations must be deterministic and shareable across threads.
pub trait EmbeddingBackend: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>>;
}

impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>> {
        (**self).embed(image)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub frame: u32,
    pub track_id: u32,
    pub values: Vec<f32>,
}

impl FeatureVector {
    pub fn distance(&self, other: &FeatureVector) -> f64 {
        euclidean(&self.values, &other.values)
    }
}

pub fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Embeds an already focused (background-blurred) frame for `state`.
pub fn embed_focused(
    focused: &RgbImage,
    state: &ObjectState,
    backend: &dyn EmbeddingBackend,
) -> Result<FeatureVector> {
    let wrap = |source: Error| Error::Embedding {
        frame: state.frame,
        track_id: state.track_id,
        source: Box::new(source),
    };
    let values = backend.embed(focused).map_err(wrap)?;
    if values.len() != backend.dimension() {
        return Err(wrap(Error::backend(
            backend.name(),
            format!("returned {} values, expected {}", values.len(), backend.dimension()),
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(wrap(Error::backend(backend.name(), "non-finite embedding value")));
    }
    Ok(FeatureVector {
        frame: state.frame,
        track_id: state.track_id,
        values,
    })
}

/// Blurs `frame_image` outside the object's box and embeds the result.
pub fn embed_object(
    frame_image: &RgbImage,
    state: &ObjectState,
    spec: &BlurSpec,
    backend: &dyn EmbeddingBackend,
) -> Result<FeatureVector> {
    let focused = blur_except_box(frame_image, &state.bbox, spec).map_err(|source| Error::Embedding {
        frame: state.frame,
        track_id: state.track_id,
        source: Box::new(source),
    })?;
    embed_focused(&focused, state, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;
    use image::Rgb;

    fn state(id: u32, bbox: BoundingBox) -> ObjectState {
        ObjectState {
            frame: 1,
            track_id: id,
            bbox,
            confidence: 1.0,
            class_id: 1,
            visibility: None,
            is_target: true,
            is_occluder: true,
        }
    }

    /// Gray frame with two bright squares.
    fn scene() -> RgbImage {
        let mut img = RgbImage::from_pixel(128, 96, Rgb([90, 90, 90]));
        for (x0, y0) in [(8u32, 10u32), (100, 60)] {
            for y in y0..y0 + 16 {
                for x in x0..x0 + 16 {
                    img.put_pixel(x, y, Rgb([250, 240, 230]));
                }
            }
        }
        img
    }

    #[test]
    fn repeated_embedding_is_identical() {
        let img = scene();
        let backend = test_backend();
        let s = state(1, BoundingBox::new(8.0, 10.0, 16.0, 16.0));
        let spec = BlurSpec::default();
        let a = embed_object(&img, &s, &spec, &backend).unwrap();
        let b = embed_object(&img, &s, &spec, &backend).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), backend.dimension());
    }

    #[test]
    fn distant_objects_embed_differently() {
        let img = scene();
        let backend = test_backend();
        let spec = BlurSpec::default();
        let a = embed_object(&img, &state(1, BoundingBox::new(8.0, 10.0, 16.0, 16.0)), &spec, &backend).unwrap();
        let b = embed_object(&img, &state(2, BoundingBox::new(100.0, 60.0, 16.0, 16.0)), &spec, &backend).unwrap();
        assert!(a.distance(&b) > 0.0);
    }

    #[test]
    fn errors_carry_object_context() {
        let img = scene();
        let err = embed_object(
            &img,
            &state(7, BoundingBox::new(500.0, 500.0, 5.0, 5.0)),
            &BlurSpec::default(),
            &test_backend(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Embedding { frame: 1, track_id: 7, .. }));
    }

    struct Broken;
    impl EmbeddingBackend for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn dimension(&self) -> usize {
            4
        }
        fn embed(&self, _: &RgbImage) -> Result<Vec<f32>> {
            Ok(vec![0.0; 3])
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let img = scene();
        let s = state(1, BoundingBox::new(8.0, 10.0, 16.0, 16.0));
        assert!(embed_focused(&img, &s, &Broken).is_err());
    }
}
