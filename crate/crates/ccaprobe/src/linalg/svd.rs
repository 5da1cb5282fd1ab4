//! One-sided Jacobi singular value decomposition.
//!
//! Small and mid-size dense problems only, which is all this crate needs:
//! the largest inputs are feature matrices with a few dozen columns. Jacobi
//! iterations are slower than blocked QR methods but are simple, accurate for
//! small singular values, and fully deterministic.

use ndarray::Array1;

use super::{largest_abs_index, Matrix, RANK_REL_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;
const CONV_TOL: f64 = 1e-14;

/// Thin SVD `x = u · diag(s) · vt` with `s` nonnegative descending and
/// orthonormal columns in `u` and rows in `vt`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Array1<f64>,
    pub vt: Matrix,
}

/// Decomposes an arbitrary dense matrix. Fails with a distinct error if the
/// Jacobi sweeps do not converge (never returns silent garbage).
pub fn svd(x: &Matrix) -> Result<Svd> {
    super::ensure_finite(x, "svd")?;
    if x.nrows() >= x.ncols() {
        svd_tall(x)
    } else {
        // X = U S Vt  ⇔  Xᵀ = V S Uᵀ
        let dec = svd_tall(&x.t().to_owned())?;
        Ok(Svd {
            u: dec.vt.t().to_owned(),
            s: dec.s,
            vt: dec.u.t().to_owned(),
        })
    }
}

fn svd_tall(x: &Matrix) -> Result<Svd> {
    let (m, n) = (x.nrows(), x.ncols());
    let mut a = x.clone();
    let mut v = Matrix::eye(n);

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = a.column(p).dot(&a.column(p));
                let beta = a.column(q).dot(&a.column(q));
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= CONV_TOL * (alpha * beta).sqrt() || alpha * beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "SVD did not converge within {MAX_SWEEPS} Jacobi sweeps"
        )));
    }

    // Column norms are the singular values; normalized columns form U.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).dot(&a.column(j)).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = Matrix::zeros((m, n));
    let mut s = Array1::zeros(n);
    let mut vt = Matrix::zeros((n, n));
    let max_norm = norms.iter().cloned().fold(0.0_f64, f64::max);
    for (slot, &j) in order.iter().enumerate() {
        s[slot] = norms[j];
        if norms[j] > RANK_REL_TOL * max_norm && norms[j] > 0.0 {
            let col = a.column(j).mapv(|x| x / norms[j]);
            u.column_mut(slot).assign(&col);
        }
        vt.row_mut(slot).assign(&v.column(j));
    }
    complete_zero_columns(&mut u, &s, max_norm)?;

    // Sign convention: largest-|entry| of each right singular vector is
    // nonnegative; U flips with it so the product is unchanged.
    for i in 0..n {
        let pivot = largest_abs_index(vt.row(i));
        if vt[[i, pivot]] < 0.0 {
            vt.row_mut(i).mapv_inplace(|x| -x);
            u.column_mut(i).mapv_inplace(|x| -x);
        }
    }

    Ok(Svd { u, s, vt })
}

fn rotate_columns(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..a.nrows() {
        let ap = a[[i, p]];
        let aq = a[[i, q]];
        a[[i, p]] = c * ap - s * aq;
        a[[i, q]] = s * ap + c * aq;
    }
}

/// Fills U columns left empty by zero singular values with an orthonormal
/// completion, so U always has orthonormal columns.
fn complete_zero_columns(u: &mut Matrix, s: &Array1<f64>, max_norm: f64) -> Result<()> {
    let (m, n) = (u.nrows(), u.ncols());
    for j in 0..n {
        if s[j] > RANK_REL_TOL * max_norm && s[j] > 0.0 {
            continue;
        }
        let mut best: Option<(f64, Array1<f64>)> = None;
        for e in 0..m {
            let mut cand = Array1::zeros(m);
            cand[e] = 1.0;
            for _pass in 0..2 {
                for i in 0..n {
                    if i == j {
                        continue;
                    }
                    let ui = u.column(i);
                    let proj = ui.dot(&cand);
                    cand.scaled_add(-proj, &ui.to_owned());
                }
            }
            let norm = cand.dot(&cand).sqrt();
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
            if norm > 0.5 {
                break;
            }
        }
        let (norm, cand) = best.expect("m >= 1");
        if norm < 1e-8 {
            return Err(Error::Numerical(
                "could not complete an orthonormal basis for U".into(),
            ));
        }
        u.column_mut(j).assign(&(cand / norm));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gemm_tn, random_orthonormal};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn frob(x: &Matrix) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn check_factorization(x: &Matrix, dec: &Svd) {
        let rebuilt = dec.u.dot(&Matrix::from_diag(&dec.s)).dot(&dec.vt);
        let err = frob(&(&rebuilt - x));
        assert!(
            err <= 1e-8 * frob(x).max(1.0),
            "reconstruction error {err}"
        );
        for w in dec.s.windows(2) {
            assert!(w[0] >= w[1], "singular values not descending");
        }
        let utu = gemm_tn(&dec.u, &dec.u);
        let v = dec.vt.t().to_owned();
        let vtv = gemm_tn(&v, &v);
        for g in [&utu, &vtv] {
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(g[[i, j]], want, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_singular_values() {
        let dec = svd(&Matrix::eye(3)).unwrap();
        for &v in dec.s.iter() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_singular_values() {
        let x = array![[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]];
        let dec = svd(&x).unwrap();
        assert_abs_diff_eq!(dec.s[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.s[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.s[2], 1.0, epsilon = 1e-12);
        check_factorization(&x, &dec);
    }

    #[test]
    fn random_tall_and_wide_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut tall = Matrix::zeros((50, 8));
        for v in tall.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        check_factorization(&tall, &svd(&tall).unwrap());
        let wide = tall.t().to_owned();
        check_factorization(&wide, &svd(&wide).unwrap());
    }

    #[test]
    fn rank_deficient_keeps_orthonormal_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_orthonormal(10, 2, &mut rng).unwrap();
        let x = q.dot(&q.t().to_owned()); // rank 2, 10x10
        let dec = svd(&x).unwrap();
        check_factorization(&x, &dec);
        assert!(dec.s[2] < 1e-10 * dec.s[0]);
    }

    #[test]
    fn orthogonal_invariance_of_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut x = Matrix::zeros((20, 6));
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let q = random_orthonormal(6, 6, &mut rng).unwrap();
        let s1 = svd(&x).unwrap().s;
        let s2 = svd(&x.dot(&q)).unwrap().s;
        for (a, b) in s1.iter().zip(s2.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn deterministic_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut x = Matrix::zeros((12, 4));
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let a = svd(&x).unwrap();
        let b = svd(&x).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.vt, b.vt);
        for i in 0..4 {
            let pivot = largest_abs_index(a.vt.row(i));
            assert!(a.vt[[i, pivot]] >= 0.0);
        }
    }
}
