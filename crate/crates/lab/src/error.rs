use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: plate_core::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("cannot serialize the report: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit code: 3 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 3,
            _ => 1,
        }
    }
}

/// Attach a stage name to a core error.
pub(crate) fn stage<T>(name: &'static str, r: plate_core::Result<T>) -> Result<T, LabError> {
    r.map_err(|source| LabError::Stage { stage: name, source })
}
