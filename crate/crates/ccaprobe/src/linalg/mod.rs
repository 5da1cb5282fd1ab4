//! Dense real matrix primitives: centering, SVD, symmetric
//! eigendecomposition, PCA and whitening helpers used by every other module.
//!
//! All routines are pure functions on immutable inputs and are safe to call
//! from parallel sweeps. Decompositions follow a fixed sign convention (the
//! entry of largest magnitude in each component is nonnegative) so repeated
//! runs are deterministic.

mod eigen;
mod pca;
mod svd;

pub use eigen::eigh;
pub use pca::{fit_pca, pca_inverse, pca_transform, PcaModel};
pub use svd::{svd, Svd};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense row-major matrix of f64; rows are samples unless stated otherwise.
pub type Matrix = Array2<f64>;

/// Singular values below `RANK_REL_TOL * max(S)` count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Rejects empty or non-finite matrices.
pub fn ensure_finite(x: &Matrix, what: &'static str) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidArgument(format!("{what}: empty matrix")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{what}: matrix contains NaN or infinite entries"
        )));
    }
    Ok(())
}

/// Removes the column means. Returns the centered matrix and the mean vector.
pub fn center(x: &Matrix) -> Result<(Matrix, Array1<f64>)> {
    ensure_finite(x, "center")?;
    let mean = x
        .mean_axis(ndarray::Axis(0))
        .expect("non-empty checked above");
    let centered = x - &mean;
    Ok((centered, mean))
}

/// aᵀ·b with a plain k-ascending accumulation per entry, so that
/// `gemm_tn(a, b)[i, j]` is bitwise equal to `gemm_tn(b, a)[j, i]`.
pub(crate) fn gemm_tn(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.nrows(), b.nrows(), "gemm_tn: row counts must match");
    let (s, n) = (a.nrows(), a.ncols());
    let m = b.ncols();
    let mut out = Matrix::zeros((n, m));
    for i in 0..n {
        let ai = a.column(i);
        for j in 0..m {
            let bj = b.column(j);
            let mut acc = 0.0;
            for k in 0..s {
                acc += ai[k] * bj[k];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// Sample covariance of a centered matrix, normalized by (s − 1).
/// Exactly symmetric by construction.
pub(crate) fn covariance(xc: &Matrix) -> Matrix {
    let s = xc.nrows();
    let denom = (s.max(2) - 1) as f64;
    gemm_tn(xc, xc) / denom
}

/// Index of the entry with the largest absolute value (first on ties).
pub(crate) fn largest_abs_index(v: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    let mut best_abs = v[0].abs();
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    best
}

/// In-place modified Gram–Schmidt with one re-orthogonalization pass.
/// Returns an error if a column is (numerically) linearly dependent.
pub(crate) fn orthonormalize_columns(m: &mut Matrix) -> Result<()> {
    let k = m.ncols();
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = m.column(i).dot(&m.column(j));
                let qi = m.column(i).to_owned();
                let mut cj = m.column_mut(j);
                cj.scaled_add(-proj, &qi);
            }
        }
        let norm = m.column(j).dot(&m.column(j)).sqrt();
        if norm < 1e-12 {
            return Err(Error::Numerical(
                "orthonormalization hit a linearly dependent column".into(),
            ));
        }
        m.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(())
}

/// n×k matrix with orthonormal columns spanning a uniformly random
/// k-dimensional subspace (orthonormalized Gaussian draw).
pub fn random_orthonormal<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<Matrix> {
    assert!(k <= n, "random_orthonormal: k must not exceed n");
    let mut m = Matrix::zeros((n, k));
    for v in m.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    orthonormalize_columns(&mut m)?;
    Ok(m)
}

/// Number of singular values above `RANK_REL_TOL` relative to the largest.
pub fn numerical_rank(x: &Matrix) -> Result<usize> {
    let dec = svd(x)?;
    let max = dec.s.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(dec.s.iter().filter(|&&v| v > RANK_REL_TOL * max).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn center_hand_example() {
        let x = array![[1.0, 3.0], [3.0, 5.0]];
        let (xc, mean) = center(&x).unwrap();
        assert_eq!(xc, array![[-1.0, -1.0], [1.0, 1.0]]);
        assert_eq!(mean, array![2.0, 4.0]);
    }

    #[test]
    fn center_single_row() {
        let x = array![[4.0, -1.0, 7.0]];
        let (xc, mean) = center(&x).unwrap();
        assert!(xc.iter().all(|&v| v == 0.0));
        assert_eq!(mean, array![4.0, -1.0, 7.0]);
    }

    #[test]
    fn center_random_columns_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = Matrix::zeros((100, 5));
        for v in x.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * 3.0 + 1.5;
        }
        let (xc, mean) = center(&x).unwrap();
        for j in 0..5 {
            let m = xc.column(j).sum() / 100.0;
            assert!(m.abs() < 1e-12, "column {j} mean {m}");
        }
        // Xc + mean restores X up to rounding.
        let restored = &xc + &mean;
        for (a, b) in restored.iter().zip(x.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn center_rejects_empty_and_nonfinite() {
        assert!(center(&Matrix::zeros((0, 3))).is_err());
        let x = array![[1.0, f64::NAN]];
        assert!(center(&x).is_err());
    }

    #[test]
    fn gemm_tn_transpose_exactness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = Matrix::zeros((40, 5));
        let mut b = Matrix::zeros((40, 7));
        for v in a.iter_mut().chain(b.iter_mut()) {
            *v = rng.sample(StandardNormal);
        }
        let ab = gemm_tn(&a, &b);
        let ba = gemm_tn(&b, &a);
        for i in 0..5 {
            for j in 0..7 {
                assert_eq!(ab[[i, j]].to_bits(), ba[[j, i]].to_bits());
            }
        }
    }

    #[test]
    fn random_orthonormal_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = random_orthonormal(16, 6, &mut rng).unwrap();
        let gram = gemm_tn(&q, &q);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[[i, j]], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn numerical_rank_detects_deficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = random_orthonormal(8, 3, &mut rng).unwrap();
        let low_rank = q.dot(&q.t().to_owned());
        assert_eq!(numerical_rank(&low_rank).unwrap(), 3);
        let full: Matrix = Matrix::eye(8);
        assert_eq!(numerical_rank(&full).unwrap(), 8);
    }
}
