//! File formats, parallel drivers and the benchmark harness around
//! [`locality_core`].

pub mod benchmark;
pub mod cli;
pub mod csv_io;
pub mod error;
pub mod model_io;
pub mod parallel;
pub mod report;

pub use error::{AppError, Result};
