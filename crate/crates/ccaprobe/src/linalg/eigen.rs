//! Cyclic Jacobi eigendecomposition for symmetric matrices.

use ndarray::Array1;

use super::{largest_abs_index, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix: eigenvalues descending,
/// eigenvectors as the columns of the returned matrix.
pub fn eigh(a: &Matrix) -> Result<(Array1<f64>, Matrix)> {
    super::ensure_finite(a, "eigh")?;
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dims(
            "eigh",
            format!("{n}x{n} symmetric"),
            format!("{}x{}", n, a.ncols()),
        ));
    }
    let scale = a.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (a[[i, j]] - a[[j, i]]).abs() > 1e-8 * scale.max(1.0) {
                return Err(Error::InvalidArgument(
                    "eigh: matrix is not symmetric".into(),
                ));
            }
        }
    }

    let mut m = a.clone();
    let mut v = Matrix::eye(n);
    let off_tol = 1e-14 * scale.max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= off_tol {
                    continue;
                }
                rotated = true;
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                apply_rotation(&mut m, p, q, c, s);
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "eigendecomposition did not converge within {MAX_SWEEPS} Jacobi sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let mut values = Array1::zeros(n);
    let mut vectors = Matrix::zeros((n, n));
    for (slot, &j) in order.iter().enumerate() {
        values[slot] = m[[j, j]];
        vectors.column_mut(slot).assign(&v.column(j));
        let pivot = largest_abs_index(vectors.column(slot));
        if vectors[[pivot, slot]] < 0.0 {
            vectors.column_mut(slot).mapv_inplace(|x| -x);
        }
    }
    Ok((values, vectors))
}

fn apply_rotation(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for i in 0..n {
        let mip = m[[i, p]];
        let miq = m[[i, q]];
        m[[i, p]] = c * mip - s * miq;
        m[[i, q]] = s * mip + c * miq;
    }
    for j in 0..n {
        let mpj = m[[p, j]];
        let mqj = m[[q, j]];
        m[[p, j]] = c * mpj - s * mqj;
        m[[q, j]] = s * mpj + c * mqj;
    }
}
