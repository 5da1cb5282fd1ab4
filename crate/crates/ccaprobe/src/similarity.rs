//! Scalar similarity scores between two feature matrices: mean canonical
//! correlation, SVCCA (the same score after a 99%-variance truncation),
//! projection-weighted CCA, and linear CKA.

use serde::{Deserialize, Serialize};

use crate::cca::{canonical_variables, fit_cca, Side, DEFAULT_VARIANCE_KEEP};
use crate::error::{Error, Result};
use crate::linalg::{self, center};
use crate::FeatureMatrix;

/// Variance fraction kept by the SVCCA truncation.
pub const SVCCA_VARIANCE_KEEP: f64 = 0.99;

/// All four similarity scores for one pair of feature matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub mean_cca: f64,
    pub svcca: f64,
    pub pwcca: f64,
    pub linear_cka: f64,
    /// Variance fraction used for `mean_cca` and `pwcca`.
    pub variance_keep: f64,
    /// Variance fraction used for `svcca`.
    pub svcca_variance_keep: f64,
}

impl SimilarityReport {
    /// Computes every score with the default variance fractions, using
    /// side 1 as the PWCCA reference.
    pub fn compute(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<SimilarityReport> {
        Ok(SimilarityReport {
            mean_cca: mean_cca(x1, x2, DEFAULT_VARIANCE_KEEP)?,
            svcca: svcca(x1, x2)?,
            pwcca: pwcca(x1, x2, Side::One, DEFAULT_VARIANCE_KEEP)?,
            linear_cka: linear_cka(x1, x2)?,
            variance_keep: DEFAULT_VARIANCE_KEEP,
            svcca_variance_keep: SVCCA_VARIANCE_KEEP,
        })
    }
}

/// Mean of the canonical correlations after the PCA pre-step.
pub fn mean_cca(x1: &FeatureMatrix, x2: &FeatureMatrix, variance_keep: f64) -> Result<f64> {
    let basis = fit_cca(x1, x2, variance_keep)?;
    Ok(basis.rho.sum() / basis.k as f64)
}

/// Mean canonical correlation after truncating each side to 99% variance.
pub fn svcca(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<f64> {
    mean_cca(x1, x2, SVCCA_VARIANCE_KEEP)
}

/// Projection-weighted CCA: canonical correlations averaged with weights
/// proportional to the variance of the reference side captured by each
/// canonical component (the squared norm of that component's loadings).
pub fn pwcca(
    x1: &FeatureMatrix,
    x2: &FeatureMatrix,
    reference_side: Side,
    variance_keep: f64,
) -> Result<f64> {
    let basis = fit_cca(x1, x2, variance_keep)?;
    let reference = match reference_side {
        Side::One => x1,
        Side::Two => x2,
    };
    let scores = canonical_variables(&basis, reference, reference_side)?;
    let (xc, _) = center(reference)?;
    let s = reference.nrows() as f64;

    // Loadings of canonical component i against the original features:
    // cov(x_j, t_i) for every feature j; the squared norm is the variance of
    // the reference explained by component i (t_i has unit variance).
    let loadings = linalg::gemm_tn(&xc, &scores) / (s - 1.0);
    let mut weights = Vec::with_capacity(basis.k);
    for i in 0..basis.k {
        weights.push(loadings.column(i).iter().map(|v| v * v).sum::<f64>());
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numerical(
            "pwcca: reference side has no variance along the canonical components".into(),
        ));
    }
    Ok(weights
        .iter()
        .zip(basis.rho.iter())
        .map(|(w, r)| w / total * r)
        .sum())
}

/// Linear centered-kernel-alignment similarity:
/// ‖X1ᶜᵀ·X2ᶜ‖²_F / (‖X1ᶜᵀ·X1ᶜ‖_F · ‖X2ᶜᵀ·X2ᶜ‖_F).
pub fn linear_cka(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Result<f64> {
    linalg::ensure_finite(x1, "linear_cka side 1")?;
    linalg::ensure_finite(x2, "linear_cka side 2")?;
    if x1.nrows() != x2.nrows() {
        return Err(Error::dims(
            "linear_cka",
            format!("{} rows on both sides", x1.nrows()),
            format!("{} rows on side 2", x2.nrows()),
        ));
    }
    let (c1, _) = center(x1)?;
    let (c2, _) = center(x2)?;
    let cross = linalg::gemm_tn(&c1, &c2);
    let self1 = linalg::gemm_tn(&c1, &c1);
    let self2 = linalg::gemm_tn(&c2, &c2);
    let denom = sq_frobenius_sym(&self1).sqrt() * sq_frobenius_sym(&self2).sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "linear_cka: a side has zero variance".into(),
        ));
    }
    Ok(sq_frobenius_sym(&cross) / denom)
}

/// Squared Frobenius norm accumulated in both iteration orders and averaged,
/// so that swapping the two sides of the cross matrix gives a bitwise equal
/// result.
fn sq_frobenius_sym(m: &crate::Matrix) -> f64 {
    let row_major: f64 = m.iter().map(|v| v * v).sum();
    let col_major: f64 = m.t().iter().map(|v| v * v).sum();
    0.5 * (row_major + col_major)
}
