//! Canonical Correlation Analysis between two aligned feature matrices.
//!
//! The fit follows the stable linear-algebra route: center each side, reduce
//! with PCA (keeping a configurable cumulative variance fraction, 0.9999 by
//! default), whiten each reduced side, then take the SVD of the normalized
//! cross-covariance. The singular values are the canonical correlations and
//! the rotated whitening maps are the per-side basis changes.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, fit_pca, pca_transform, svd, Matrix, PcaModel};
use crate::FeatureMatrix;

/// Cumulative variance fraction retained by the PCA pre-step by default.
pub const DEFAULT_VARIANCE_KEEP: f64 = 0.9999;

/// Which of the two fitted sides a matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }
}

/// Fitted CCA basis. `b1`/`b2` act on PCA-reduced coordinates; the composed
/// maps to and from the original feature spaces are exposed through
/// [`CcaBasis::forward_map`] and [`CcaBasis::backward_map`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CcaBasis {
    /// Side-1 basis change, k1×k: reduced coordinates → canonical variables.
    pub b1: Matrix,
    /// Side-2 basis change, k2×k.
    pub b2: Matrix,
    /// Canonical correlations, descending, each in [0, 1].
    pub rho: Array1<f64>,
    /// PCA pre-step of side 1.
    pub pca1: PcaModel,
    /// PCA pre-step of side 2.
    pub pca2: PcaModel,
    /// Number of canonical pairs: min(rank1, rank2).
    pub k: usize,
    /// Right inverse of `b1` on the canonical space (k×k1).
    pub b1_pinv: Matrix,
    /// Right inverse of `b2` on the canonical space (k×k2).
    pub b2_pinv: Matrix,
}

impl CcaBasis {
    fn pca(&self, side: Side) -> &PcaModel {
        match side {
            Side::One => &self.pca1,
            Side::Two => &self.pca2,
        }
    }

    fn b(&self, side: Side) -> &Matrix {
        match side {
            Side::One => &self.b1,
            Side::Two => &self.b2,
        }
    }

    fn b_pinv(&self, side: Side) -> &Matrix {
        match side {
            Side::One => &self.b1_pinv,
            Side::Two => &self.b2_pinv,
        }
    }

    /// Original feature dimension of the given side.
    pub fn input_dim(&self, side: Side) -> usize {
        self.pca(side).input_dim()
    }

    /// Training mean of the given side, in original coordinates.
    pub fn mean(&self, side: Side) -> &Array1<f64> {
        &self.pca(side).mean
    }

    /// n×k map from centered original coordinates to canonical variables
    /// (PCA projection composed with the basis change).
    pub fn forward_map(&self, side: Side) -> Matrix {
        self.pca(side).components.dot(self.b(side))
    }

    /// k×n map from canonical variables back to centered original
    /// coordinates. Uses the pseudo-inverse of the basis change, since the
    /// PCA pre-step can make the composed map rectangular.
    pub fn backward_map(&self, side: Side) -> Matrix {
        self.b_pinv(side).dot(&self.pca(side).components.t())
    }
}

/// Fits CCA between two row-aligned feature matrices. Row i of both inputs
/// must come from the same underlying sample.
pub fn fit_cca(x1: &FeatureMatrix, x2: &FeatureMatrix, variance_keep: f64) -> Result<CcaBasis> {
    linalg::ensure_finite(x1, "fit_cca side 1")?;
    linalg::ensure_finite(x2, "fit_cca side 2")?;
    if x1.nrows() != x2.nrows() {
        return Err(Error::dims(
            "fit_cca",
            format!("{} rows on both sides", x1.nrows()),
            format!("{} rows on side 2", x2.nrows()),
        ));
    }
    if x1.nrows() < 3 {
        return Err(Error::InvalidArgument(
            "fit_cca needs at least 3 samples".into(),
        ));
    }
    let s = x1.nrows();

    let pca1 = fit_pca(x1, variance_keep).map_err(|e| side_err(e, 1))?;
    let pca2 = fit_pca(x2, variance_keep).map_err(|e| side_err(e, 2))?;
    let z1 = pca_transform(&pca1, x1)?;
    let z2 = pca_transform(&pca2, x2)?;

    let (w1, w1_inv) = whitening_maps(&z1)?;
    let (w2, w2_inv) = whitening_maps(&z2)?;
    let zw1 = z1.dot(&w1);
    let zw2 = z2.dot(&w2);

    let cross = linalg::gemm_tn(&zw1, &zw2) / (s - 1) as f64;
    let dec = svd(&cross)?;
    let k = pca1.k().min(pca2.k());

    let mut rho = Array1::zeros(k);
    for i in 0..k {
        rho[i] = dec.s[i].min(1.0);
    }
    let u = dec.u.slice(ndarray::s![.., ..k]).to_owned();
    let v = dec.vt.slice(ndarray::s![..k, ..]).t().to_owned();

    let mut b1 = w1.dot(&u);
    let mut b2 = w2.dot(&v);
    let mut b1_pinv = u.t().dot(&w1_inv);
    let mut b2_pinv = v.t().dot(&w2_inv);

    // Deterministic signs: the largest-magnitude entry of each canonical
    // component, expressed in side-1 original coordinates, is nonnegative.
    // Pairs flip jointly so correlations keep their sign.
    let composed1 = pca1.components.dot(&b1);
    for i in 0..k {
        let pivot = linalg::largest_abs_index(composed1.column(i));
        if composed1[[pivot, i]] < 0.0 {
            b1.column_mut(i).mapv_inplace(|x| -x);
            b2.column_mut(i).mapv_inplace(|x| -x);
            b1_pinv.row_mut(i).mapv_inplace(|x| -x);
            b2_pinv.row_mut(i).mapv_inplace(|x| -x);
        }
    }

    Ok(CcaBasis {
        b1,
        b2,
        rho,
        pca1,
        pca2,
        k,
        b1_pinv,
        b2_pinv,
    })
}

fn side_err(e: Error, side: usize) -> Error {
    match e {
        Error::InvalidArgument(msg) if msg.contains("zero total variance") => {
            Error::InvalidArgument(format!("fit_cca: side {side} has zero variance"))
        }
        other => other,
    }
}

/// Symmetric inverse square root (and square root) of the sample covariance,
/// with a small ridge on the diagonal before inversion.
fn whitening_maps(z: &Matrix) -> Result<(Matrix, Matrix)> {
    let cov = linalg::covariance(z);
    let n = cov.nrows();
    let trace: f64 = (0..n).map(|i| cov[[i, i]]).sum();
    let ridge = 1e-10 * trace / n as f64;
    let (vals, vecs) = eigh(&cov)?;
    let mut w = Matrix::zeros((n, n));
    let mut w_inv = Matrix::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            let mut acc_inv = 0.0;
            for j in 0..n {
                let lam = (vals[j].max(0.0) + ridge).sqrt();
                acc += vecs[[a, j]] * vecs[[b, j]] / lam;
                acc_inv += vecs[[a, j]] * vecs[[b, j]] * lam;
            }
            w[[a, b]] = acc;
            w_inv[[a, b]] = acc_inv;
        }
    }
    Ok((w, w_inv))
}

/// Maps features of one side into canonical variables (s×k).
pub fn canonical_variables(
    basis: &CcaBasis,
    x: &FeatureMatrix,
    side: Side,
) -> Result<FeatureMatrix> {
    let n = basis.input_dim(side);
    if x.ncols() != n {
        return Err(Error::dims(
            "canonical_variables",
            format!("{n} columns for side {}", side.index()),
            format!("{} columns", x.ncols()),
        ));
    }
    linalg::ensure_finite(x, "canonical_variables")?;
    Ok((x - basis.mean(side)).dot(&basis.forward_map(side)))
}

/// Pearson correlation between two equal-length sample vectors.
pub fn pearson(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    let n = a.len() as f64;
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}
