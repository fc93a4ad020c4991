//! Local surrogate explanations for black-box classifiers.
//!
//! The crate covers the whole pipeline an explainer needs once a classifier
//! is trained: sampling a neighbourhood, fitting a weighted linear surrogate,
//! and scoring how faithfully that surrogate tracks the classifier inside a
//! ball around the query ("local fidelity").
//!
//! Two explainers are provided:
//!
//! * [`surrogate::explain_lime`]: global normal sampling with RBF distance
//!   weighting (LIME, and LIME-K with a reduced kernel width);
//! * [`surrogate::explain_ls`]: locate the nearest decision-boundary point
//!   with an expanding-sphere search, then sample uniformly in a ball around
//!   that point (Local Surrogate).
//!
//! Everything here is `no_std` + `alloc`. File formats, the CLI and parallel
//! drivers live in the `locality` crate.
#![no_std]
#![deny(missing_docs)]

extern crate alloc;

pub mod blackbox;
pub mod data;
pub mod error;
pub mod fidelity;
pub mod rng;
pub mod sampling;
pub mod surrogate;

mod linalg;

pub use blackbox::{BlackBox, Oracle, RandomForest, RandomForestParams, Scorer};
pub use data::{Dataset, FeatureStats};
pub use error::{Error, Result};
pub use fidelity::{FidelityConfig, FidelityReport, InstanceOutcome, InstanceScore};
pub use sampling::{BoundaryPoint, GrowingSpheresConfig};
pub use surrogate::{ExplainerConfig, Explanation, KernelShape, LinearSurrogate, Method};
