//! ONNX backend for an exported image backbone (ResNet-18 pooled features by default).

use std::fs;
use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use image::RgbImage;
use serde::{Deserialize, Serialize};
use tract_onnx::prelude::*;

use super::EmbeddingBackend;
use crate::error::{Error, Result};

/// Sidecar written next to the model file (`model.onnx` -> `model.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub input_size: u32,
    pub mean: [f32; 3],
    pub std: [f32; 3],
    pub output_dim: usize,
}

impl ModelMetadata {
    pub fn sidecar_path(model_path: &Path) -> PathBuf {
        model_path.with_extension("json")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let meta: ModelMetadata = serde_json::from_slice(&fs::read(path)?)?;
        if meta.input_size == 0 || meta.output_dim == 0 {
            return Err(Error::backend("onnx", "metadata sizes must be positive"));
        }
        if meta.std.iter().any(|s| *s <= 0.0) {
            return Err(Error::backend("onnx", "metadata std values must be positive"));
        }
        Ok(meta)
    }
}

type Plan = std::sync::Arc<TypedRunnableModel>;

pub struct OnnxBackend {
    name: String,
    meta: ModelMetadata,
    plan: Plan,
}

pub fn onnx_backend(model_path: impl AsRef<Path>) -> Result<OnnxBackend> {
    OnnxBackend::load(model_path.as_ref())
}

impl OnnxBackend {
    pub fn load(model_path: &Path) -> Result<Self> {
        let fail = |e: TractError| Error::backend("onnx", format!("{}: {e}", model_path.display()));
        if !model_path.is_file() {
            return Err(Error::backend(
                "onnx",
                format!("model file {} not found", model_path.display()),
            ));
        }
        let meta = ModelMetadata::load(&ModelMetadata::sidecar_path(model_path))?;
        let side = meta.input_size as usize;
        let model = tract_onnx::onnx()
            .model_for_path(model_path)
            .and_then(|m| m.with_input_fact(0, f32::fact([1, 3, side, side]).into()))
            .and_then(|m| m.into_optimized())
            .map_err(fail)?;
        let output = model.output_fact(0).map_err(fail)?;
        let dim: Option<usize> = output
            .shape
            .as_concrete()
            .map(|dims| dims.iter().product());
        if dim != Some(meta.output_dim) {
            return Err(Error::backend(
                "onnx",
                format!(
                    "model output shape {:?} does not match metadata output_dim {}",
                    output.shape, meta.output_dim
                ),
            ));
        }
        let plan = model.into_runnable().map_err(fail)?;
        let name = model_path
            .file_stem()
            .map(|s| format!("onnx:{}", s.to_string_lossy()))
            .unwrap_or_else(|| "onnx".to_string());
        Ok(Self { name, meta, plan })
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.meta
    }

    /// NCHW float tensor: plain resize to the input resolution, then
    /// `(v / 255 - mean) / std` per channel.
    fn input_tensor(&self, image: &RgbImage) -> Tensor {
        let side = self.meta.input_size;
        let resized;
        let img = if image.dimensions() == (side, side) {
            image
        } else {
            resized = image::imageops::resize(image, side, side, FilterType::Triangle);
            &resized
        };
        let (mean, std) = (self.meta.mean, self.meta.std);
        tract_ndarray::Array4::from_shape_fn((1, 3, side as usize, side as usize), |(_, c, y, x)| {
            let v = f32::from(img.get_pixel(x as u32, y as u32)[c]) / 255.0;
            (v - mean[c]) / std[c]
        })
        .into()
    }
}

impl EmbeddingBackend for OnnxBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.meta.output_dim
    }

    fn embed(&self, image: &RgbImage) -> Result<Vec<f32>> {
        let outputs = self
            .plan
            .run(tvec!(self.input_tensor(image).into()))
            .map_err(|e| Error::backend(&self.name, e.to_string()))?;
        let view = outputs[0]
            .to_plain_array_view::<f32>()
            .map_err(|e| Error::backend(&self.name, e.to_string()))?;
        Ok(view.iter().copied().collect())
    }
}
