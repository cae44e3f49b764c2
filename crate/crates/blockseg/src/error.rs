// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use blockseg_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    /// `config`, `data` or `no_feasible_segmentation`.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            4 => "no_feasible_segmentation",
            _ => "data",
        }
    }

    /// Process exit code: 2 configuration, 3 data, 4 no feasible segmentation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Core(e) => core_exit_code(e),
            Error::Data { .. } | Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 3,
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::NoFeasibleSegmentation => 4,
        CoreError::Replicate { source, .. } => core_exit_code(source),
        CoreError::InvalidFamily(_)
        | CoreError::InvalidPenalty(_)
        | CoreError::MissingMarkerMap
        | CoreError::TooLarge { .. }
        | CoreError::Config(_) => 2,
        _ => 3,
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
