use std::path::PathBuf;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad user input, detected before any computation.
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] tbri_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("incompatible runs: {0}")]
    Incompatible(String),
    #[error("store at {path} holds a different plan")]
    PlanMismatch { path: PathBuf },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        AppError::Json {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        AppError::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for rejected input, 3 for failed computations,
    /// 4 for file-system and format problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) | AppError::PlanMismatch { .. } => 2,
            AppError::Core(e) => match e {
                tbri_core::Error::InvalidParameter(_)
                | tbri_core::Error::BasisTooLarge { .. }
                | tbri_core::Error::DimensionOverCap { .. }
                | tbri_core::Error::IndexOutOfRange { .. }
                | tbri_core::Error::BasisMismatch { .. } => 2,
                _ => 3,
            },
            AppError::Incompatible(_) => 3,
            AppError::Io { .. } | AppError::Json { .. } | AppError::Csv { .. } | AppError::Format { .. } => 4,
        }
    }
}
