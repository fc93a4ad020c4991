//! Application errors and their process exit codes.

use std::path::PathBuf;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for bad flags or arguments.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for unreadable, unwritable or malformed data.
pub const EXIT_DATA: i32 = 3;
/// Exit code for numerical failures and skip-dominated evaluations.
pub const EXIT_NUMERIC: i32 = 4;

/// Everything that can go wrong outside the algorithmic core.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Invalid command-line usage.
    #[error("{0}")]
    Usage(String),

    /// A file could not be opened, read or written.
    #[error("{path}: {source}")]
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying failure.
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV.
    #[error("{path}: {source}")]
    Csv {
        /// Offending path.
        path: PathBuf,
        /// Underlying failure.
        #[source]
        source: csv::Error,
    },

    /// Malformed JSON.
    #[error("{path}: {source}")]
    Json {
        /// Offending path.
        path: PathBuf,
        /// Underlying failure.
        #[source]
        source: serde_json::Error,
    },

    /// The target column is absent from the header.
    #[error("target column `{0}` not found")]
    MissingTarget(String),

    /// A feature cell is not a finite number.
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    UnparseableCell {
        /// 1-based data row.
        row: usize,
        /// Column name.
        column: String,
        /// Raw cell content.
        value: String,
    },

    /// The target has more than two distinct values.
    #[error("target column has {0} classes; only binary targets are supported")]
    MulticlassUnsupported(usize),

    /// No numeric feature column is left.
    #[error("no numeric feature columns remain")]
    NoFeatures,

    /// A model file has the wrong format tag or version.
    #[error("unsupported model file: {0}")]
    ModelFormat(String),

    /// Too many instances were skipped to report a result.
    #[error("every evaluated instance was skipped")]
    AllSkipped,

    /// Failure raised by the core library.
    #[error(transparent)]
    Core(#[from] locality_core::Error),
}

impl AppError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        use locality_core::Error as E;
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::AllSkipped => EXIT_NUMERIC,
            Self::Core(E::IllConditioned | E::BoundaryNotFound { .. } | E::OneClassSample { .. } | E::UndefinedAuc) => {
                EXIT_NUMERIC
            }
            Self::Core(E::InvalidArgument(_) | E::DimensionMismatch { .. }) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

/// Result alias for the application layer.
pub type Result<T> = std::result::Result<T, AppError>;
