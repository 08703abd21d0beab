use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid annotations in {path}: {message}")]
    Validation { path: String, message: String },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("image for frame {frame} not found in {}", dir.display())]
    MissingFrame { frame: u32, dir: PathBuf },

    #[error("sequence {0} has no image directory")]
    NoImageDir(String),

    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error("no target objects")]
    NoTargets,

    #[error("motion undefined: no track has a prediction target")]
    MotionUndefined,

    #[error("no frame has a successor frame holding targets")]
    NoFramePairs,

    #[error("box lies entirely outside the {width}x{height} image")]
    BoxOutsideImage { width: u32, height: u32 },

    #[error("embedding backend {backend}: {message}")]
    Backend { backend: String, message: String },

    #[error("embedding failed for frame {frame}, track {track_id}: {source}")]
    Embedding {
        frame: u32,
        track_id: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("no sequences found under {0}")]
    NoSequences(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn backend(backend: &str, message: impl Into<String>) -> Self {
        Error::Backend {
            backend: backend.to_string(),
            message: message.into(),
        }
    }
}
