//! File formats and artifact persistence: the feature-file container
//! (binary and CSV), JSON documents for run configuration, trained models
//! and CCA bases, CSV reports, and SVG charts.

pub mod config;
pub mod feature_file;
pub mod report;
pub mod svg;

use std::path::Path;

use serde::{de::DeserializeOwned, Serialize};

use crate::cca::CcaBasis;
use crate::error::{Error, Result};
use crate::nets::MlpModel;

pub use config::{RunConfig, TrainerConfig};
pub use feature_file::{load_head, save_head, FeatureFile};

fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Corrupt {
        path: path.display().to_string(),
        reason: format!("serialization failed: {e}"),
    })?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Corrupt {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Trained MLPs are stored as JSON; serde_json prints floats in
/// shortest-roundtrip form, so parameters reload bit-exactly.
pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    save_json(model, path)
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    load_json(path)
}

pub fn save_basis(basis: &CcaBasis, path: &Path) -> Result<()> {
    save_json(basis, path)
}

pub fn load_basis(path: &Path) -> Result<CcaBasis> {
    load_json(path)
}
