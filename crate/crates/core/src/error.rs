//! Error type shared by every module in the crate.

use alloc::string::String;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error, serde::Serialize, serde::Deserialize)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A vector does not have the dimension the model or dataset expects.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Dimension required by the callee.
        expected: usize,
        /// Dimension that was supplied.
        found: usize,
    },

    /// A training set is missing one of the two classes.
    #[error("training data contains a single class")]
    SingleClass,

    /// The expanding-sphere search hit its radius cap without a label flip.
    #[error("no decision boundary found within radius {max_radius}")]
    BoundaryNotFound {
        /// Search cap that was reached.
        max_radius: f64,
    },

    /// Every point of a surrogate training ball received the same label.
    #[error("surrogate sample is single-class (label {label}); increase the surrogate radius")]
    OneClassSample {
        /// The only label observed.
        label: u8,
    },

    /// The weighted normal equations are singular.
    #[error("ridge system is ill-conditioned; use a positive ridge penalty")]
    IllConditioned,

    /// AUC requested on a label vector with a single class.
    #[error("AUC is undefined when only one class is present")]
    UndefinedAuc,
}
