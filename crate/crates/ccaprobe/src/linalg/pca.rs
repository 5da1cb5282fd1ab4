//! Principal component analysis via eigendecomposition of the sample
//! covariance (divide by s − 1).

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::{center, covariance, eigh, Matrix, RANK_REL_TOL};
use crate::error::{Error, Result};

/// Fitted PCA basis keeping the smallest leading set of components whose
/// cumulative explained variance reaches the requested fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    /// Per-feature training mean (length n).
    pub mean: Array1<f64>,
    /// n×k matrix with orthonormal columns, ordered by explained variance.
    pub components: Matrix,
    /// Covariance eigenvalues of the kept components, descending.
    pub explained_variance: Array1<f64>,
    /// Variance fraction requested at fit time, in (0, 1].
    pub variance_kept: f64,
    /// Total variance of the training data (sum of all eigenvalues).
    pub total_variance: f64,
}

impl PcaModel {
    /// Number of retained components.
    pub fn k(&self) -> usize {
        self.components.ncols()
    }

    /// Original feature dimension.
    pub fn input_dim(&self) -> usize {
        self.components.nrows()
    }
}

/// Fits PCA on rows-as-samples data, keeping the smallest number of leading
/// components whose cumulative variance reaches `variance_keep` of the total.
pub fn fit_pca(x: &Matrix, variance_keep: f64) -> Result<PcaModel> {
    if !(variance_keep > 0.0 && variance_keep <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance_keep must lie in (0, 1], got {variance_keep}"
        )));
    }
    if x.nrows() < 2 {
        return Err(Error::InvalidArgument(
            "fit_pca needs at least 2 rows".into(),
        ));
    }
    let (xc, mean) = center(x)?;
    let cov = covariance(&xc);
    let (mut vals, vecs) = eigh(&cov)?;

    vals.mapv_inplace(|v| v.max(0.0));
    let max_val = vals.iter().cloned().fold(0.0_f64, f64::max);
    let total: f64 = vals.sum();
    if total <= 0.0 || max_val <= 0.0 {
        return Err(Error::InvalidArgument(
            "fit_pca: zero total variance (constant input)".into(),
        ));
    }
    // Eigenvalues below the squared singular-value rank threshold are noise.
    let zero_floor = (RANK_REL_TOL * RANK_REL_TOL) * max_val;
    let rank = vals.iter().filter(|&&v| v > zero_floor).count().max(1);

    let target = variance_keep * total * (1.0 - 1e-12);
    let mut k = rank;
    let mut cum = 0.0;
    for (i, &v) in vals.iter().take(rank).enumerate() {
        cum += v;
        if cum >= target {
            k = i + 1;
            break;
        }
    }

    Ok(PcaModel {
        mean,
        components: vecs.slice(ndarray::s![.., ..k]).to_owned(),
        explained_variance: vals.slice(ndarray::s![..k]).to_owned(),
        variance_kept: variance_keep,
        total_variance: total,
    })
}

/// Projects onto the retained components: (X − mean) · components.
pub fn pca_transform(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    if x.ncols() != model.input_dim() {
        return Err(Error::dims(
            "pca_transform",
            format!("{} columns", model.input_dim()),
            format!("{} columns", x.ncols()),
        ));
    }
    Ok((x - &model.mean).dot(&model.components))
}

/// Maps reduced coordinates back into the original space; lossless iff the
/// model is full-rank.
pub fn pca_inverse(model: &PcaModel, z: &Matrix) -> Result<Matrix> {
    if z.ncols() != model.k() {
        return Err(Error::dims(
            "pca_inverse",
            format!("{} columns", model.k()),
            format!("{} columns", z.ncols()),
        ));
    }
    Ok(z.dot(&model.components.t()) + &model.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gemm_tn;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Matrix::zeros((rows, cols));
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        x
    }

    #[test]
    fn duplicated_column_keeps_one_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = Matrix::zeros((200, 2));
        for i in 0..200 {
            let z: f64 = rng.sample(StandardNormal);
            x[[i, 0]] = z;
            x[[i, 1]] = z;
        }
        let model = fit_pca(&x, 0.9999).unwrap();
        assert_eq!(model.k(), 1);
    }

    #[test]
    fn isotropic_gaussian_keeps_all_components() {
        let x = random_matrix(10_000, 4, 31);
        let model = fit_pca(&x, 0.9999).unwrap();
        assert_eq!(model.k(), 4);
        // Explained variances match a direct eigendecomposition of the
        // sample covariance.
        let (xc, _) = center(&x).unwrap();
        let (vals, _) = eigh(&covariance(&xc)).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(model.explained_variance[i], vals[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn rejects_constant_matrix_and_bad_fraction() {
        let x = Matrix::from_elem((10, 3), 2.5);
        assert!(fit_pca(&x, 0.9999).is_err());
        let y = random_matrix(10, 3, 1);
        assert!(fit_pca(&y, 0.0).is_err());
        assert!(fit_pca(&y, 1.5).is_err());
    }

    #[test]
    fn full_rank_round_trip() {
        let x = random_matrix(50, 6, 8);
        let model = fit_pca(&x, 1.0).unwrap();
        assert_eq!(model.k(), 6);
        let z = pca_transform(&model, &x).unwrap();
        let back = pca_inverse(&model, &z).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn rank_one_round_trip_despite_truncation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let dir = array![0.6, -0.8, 0.0, 0.2];
        let mut x = Matrix::zeros((100, 4));
        for i in 0..100 {
            let t: f64 = rng.sample(StandardNormal);
            for j in 0..4 {
                x[[i, j]] = t * dir[j] + 1.0;
            }
        }
        let model = fit_pca(&x, 0.9999).unwrap();
        assert_eq!(model.k(), 1);
        let z = pca_transform(&model, &x).unwrap();
        let back = pca_inverse(&model, &z).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn single_column_transform_matches_up_to_sign() {
        let x = random_matrix(64, 1, 5);
        let (xc, _) = center(&x).unwrap();
        let model = fit_pca(&xc, 1.0).unwrap();
        let z = pca_transform(&model, &xc).unwrap();
        let same: bool = z.iter().zip(xc.iter()).all(|(a, b)| (a - b).abs() < 1e-10);
        let flipped: bool = z.iter().zip(xc.iter()).all(|(a, b)| (a + b).abs() < 1e-10);
        assert!(same || flipped);
    }

    #[test]
    fn keep_all_variance_caps_at_sample_rank() {
        // 5 rows of 8-dim data: rank is at most rows - 1 after centering.
        let x = random_matrix(5, 8, 12);
        let model = fit_pca(&x, 1.0).unwrap();
        assert_eq!(model.k(), 4);
    }

    #[test]
    fn components_are_orthonormal() {
        let x = random_matrix(300, 7, 9);
        let model = fit_pca(&x, 1.0).unwrap();
        let gram = gemm_tn(&model.components, &model.components);
        for i in 0..model.k() {
            for j in 0..model.k() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[[i, j]], want, epsilon = 1e-10);
            }
        }
    }
}
