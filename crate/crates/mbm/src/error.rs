use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {flagged} of {total} paths flagged")]
    Numerical { flagged: u64, total: u64 },
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 2,
            HarnessError::Numerical { .. } => 3,
        }
    }
}

impl From<mbm_core::ParameterError> for HarnessError {
    fn from(e: mbm_core::ParameterError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<mbm_core::GeometryError> for HarnessError {
    fn from(e: mbm_core::GeometryError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<mbm_core::UnsupportedSurface> for HarnessError {
    fn from(e: mbm_core::UnsupportedSurface) -> Self {
        HarnessError::Config(e.to_string())
    }
}
