//! Error type shared by the file formats and the CLI.
//!
//! Exit-code policy: 0 success, 1 domain failure (degenerate data,
//! insufficient tail, attempt cap), 2 I/O, format, or usage error.

use std::path::PathBuf;

use monotone_core::datagen::DatagenError;
use monotone_core::evt::EvtError;
use monotone_core::linalg::LinalgError;
use monotone_core::nn::NnError;
use monotone_core::surrogate::SurrogateError;
use monotone_core::xai::XaiError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Xai(#[from] XaiError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Evt(#[from] EvtError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Io { .. }
            | LabError::Format(_)
            | LabError::DimensionMismatch(_)
            | LabError::Usage(_)
            | LabError::Json(_) => 2,
            LabError::Datagen(e) => match e {
                DatagenError::AttemptCapExceeded { .. } => 1,
                _ => 2,
            },
            LabError::Nn(e) => match e {
                NnError::DegenerateData | NnError::NonFiniteParameters { .. } => 1,
                _ => 2,
            },
            LabError::Surrogate(e) => match e {
                SurrogateError::DegenerateData(_) | SurrogateError::NonPlanarTree { .. } => 1,
                SurrogateError::NonFinite(_) => 2,
            },
            LabError::Evt(_) => 1,
            LabError::Linalg(e) => match e {
                LinalgError::SingularMatrix | LinalgError::ConvergenceFailure { .. } => 1,
                _ => 2,
            },
            LabError::Xai(_) => 2,
        }
    }
}
