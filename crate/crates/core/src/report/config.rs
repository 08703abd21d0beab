use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::combiner::{MeanKind, Weights};
use crate::embedder::{test_backend, EmbeddingBackend};
use crate::error::{Error, Result};
use crate::ingest::TargetFilter;
use crate::motion::MotionConfig;
use crate::occlusion::OcclusionMode;
use crate::visual::VisualConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    /// ONNX when a model path is configured, the grid backend otherwise.
    #[default]
    Auto,
    Test,
    Onnx,
}

/// Everything a `compute` run needs. Loadable from a JSON file whose keys
/// mirror the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data: Vec<PathBuf>,
    /// Glob patterns on sequence directory names; empty means all.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub filter: TargetFilter,
    pub motion: MotionConfig,
    pub visual: VisualConfig,
    pub weights: Weights,
    pub mean: MeanKind,
    pub occlusion: OcclusionMode,
    pub compute_vcom: bool,
    pub backend: BackendChoice,
    pub model: Option<PathBuf>,
    pub out: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: Vec::new(),
            include: Vec::new(),
            exclude: Vec::new(),
            filter: TargetFilter::default(),
            motion: MotionConfig::default(),
            visual: VisualConfig::default(),
            weights: Weights::default(),
            mean: MeanKind::default(),
            occlusion: OcclusionMode::default(),
            compute_vcom: true,
            backend: BackendChoice::default(),
            model: None,
            out: PathBuf::from("motcom-out"),
            threads: 0,
            cache: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.is_empty() {
            return Err(Error::Config("at least one dataset root is required".into()));
        }
        self.motion.validate()?;
        self.visual.validate()?;
        self.weights.validate()?;
        for pattern in self.include.iter().chain(&self.exclude) {
            glob::Pattern::new(pattern)
                .map_err(|e| Error::Config(format!("bad sequence pattern {pattern:?}: {e}")))?;
        }
        Ok(())
    }

    /// Instantiates the configured embedding backend.
    pub fn backend(&self) -> Result<Arc<dyn EmbeddingBackend>> {
        match (self.backend, &self.model) {
            (BackendChoice::Test, _) => Ok(Arc::new(test_backend())),
            (BackendChoice::Auto, None) => {
                if self.compute_vcom {
                    log::warn!("no model configured; using the grid test backend for VCOM");
                }
                Ok(Arc::new(test_backend()))
            }
            (BackendChoice::Onnx, None) => {
                Err(Error::Config("the onnx backend needs a model path".into()))
            }
            (BackendChoice::Onnx | BackendChoice::Auto, Some(path)) => onnx(path),
        }
    }
}

#[cfg(feature = "onnx")]
fn onnx(path: &Path) -> Result<Arc<dyn EmbeddingBackend>> {
    Ok(Arc::new(crate::embedder::onnx_backend(path)?))
}

#[cfg(not(feature = "onnx"))]
fn onnx(path: &Path) -> Result<Arc<dyn EmbeddingBackend>> {
    Err(Error::Config(format!(
        "built without ONNX support; cannot load {}",
        path.display()
    )))
}
