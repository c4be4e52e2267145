use std::path::PathBuf;

use serkit_core::audio::AudioError;
use serkit_core::experiments::ExperimentError;
use serkit_core::features::FeatureError;
use serkit_core::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Wav { path: PathBuf, source: AudioError },
    #[error("no usable utterances found under {0}")]
    EmptyManifest(PathBuf),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{failed} of {total} clips failed to decode or extract (more than 10%)")]
    ExtractionThreshold { failed: usize, total: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }

    /// Process exit code: 1 usage, 2 empty or invalid data, 3 extraction
    /// failures above threshold, 4 training divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Experiment(ExperimentError::InvalidSpec(_)) => 1,
            Error::ExtractionThreshold { .. } => 3,
            Error::Model(ModelError::NonFiniteLoss { .. }) | Error::Experiment(ExperimentError::Model(ModelError::NonFiniteLoss { .. })) => 4,
            Error::Model(ModelError::InvalidConfig(_)) | Error::Experiment(ExperimentError::Model(ModelError::InvalidConfig(_))) => 1,
            _ => 2,
        }
    }
}
