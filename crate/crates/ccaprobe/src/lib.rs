//! Desk-scale toolkit for probing what canonical correlation analysis finds
//! in the penultimate features of classification networks.
//!
//! The pipeline: generate a synthetic multi-sensor dataset, train one small
//! MLP per sensor, extract penultimate features and the final linear head,
//! fit CCA between feature sets, then measure how classification performance
//! survives projection onto low-dimensional subspaces — and whether fusing
//! two sensors through summed canonical variables behaves like simply summing
//! their class logits.
//!
//! Modules mirror the stages:
//! - [`linalg`]: matrices, SVD, eigendecomposition, PCA, whitening.
//! - [`cca`]: canonical correlation analysis with a PCA pre-step.
//! - [`heads`]: linear classification heads, metrics, head retraining.
//! - [`nets`]: synthetic data generator and a tiny MLP trainer.
//! - [`projectors`]: the subspace-reduction methods and their application.
//! - [`experiments`]: projection-performance curves and cross-sensor grids.
//! - [`fusion`]: CCA fusion vs. logit summation vs. probability averaging.
//! - [`similarity`]: mean-CCA, SVCCA, PWCCA and linear CKA scores.
//! - [`io`]: feature files, run configuration, CSV and SVG emission.
//!
//! Every entry point is deterministic given its seed; see `examples/` for
//! runnable walkthroughs of each capability.

pub mod cca;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fusion;
pub mod heads;
pub mod io;
pub mod linalg;
pub mod nets;
pub mod projectors;
pub mod seed;
pub mod similarity;

pub use error::{Error, Result};
pub use linalg::Matrix;

/// Feature matrices are plain dense matrices: rows = samples, columns =
/// features. The same shape carries logits and canonical variables.
pub type FeatureMatrix = Matrix;
