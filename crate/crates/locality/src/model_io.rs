//! Forest persistence.
//!
//! A model file is JSON of the form
//! `{"format": "locality-forest", "version": 1, "forest": {...}}`. Floats are
//! written in shortest round-trip form and parsed exactly, so a reloaded
//! forest scores bit-identically.

use std::path::Path;

use locality_core::RandomForest;
use serde::{Deserialize, Serialize};

use crate::csv_io::write_bytes;
use crate::error::{AppError, Result};

const FORMAT: &str = "locality-forest";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    forest: RandomForest,
}

/// Serialises `forest` to `path`.
pub fn save_forest(forest: &RandomForest, path: &Path) -> Result<()> {
    let file = ModelFile { format: FORMAT.into(), version: VERSION, forest: forest.clone() };
    let bytes = serde_json::to_vec(&file).map_err(|source| AppError::Json { path: path.into(), source })?;
    write_bytes(path, &bytes)
}

/// Loads and validates a forest written by [`save_forest`].
pub fn load_forest(path: &Path) -> Result<RandomForest> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let file: ModelFile =
        serde_json::from_slice(&bytes).map_err(|source| AppError::Json { path: path.into(), source })?;
    if file.format != FORMAT || file.version != VERSION {
        return Err(AppError::ModelFormat(format!("{} v{}", file.format, file.version)));
    }
    use locality_core::BlackBox;
    let dim = file.forest.dim();
    Ok(RandomForest::from_trees(dim, file.forest.trees().to_vec())?)
}
