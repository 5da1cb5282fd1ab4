//! Rank-n_s projections of the feature space and the seven ways of choosing
//! the retained subspace: CCA components (most / least / randomly
//! correlated), top principal components, a random orthogonal subspace, a
//! random coordinate subset, and the coordinates with the highest mean
//! absolute activation.
//!
//! Projection always acts on centered features with the mean re-added
//! afterwards, so projectors compose correctly with biased heads. With
//! `n_s = n` every method degenerates to the identity and leaves the data
//! unchanged.

use ndarray::Array1;
use rand::{seq::index::sample as index_sample, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cca::{CcaBasis, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, random_orthonormal, Matrix, PcaModel};
use crate::FeatureMatrix;

/// Subspace-selection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CcaHighest,
    CcaLowest,
    CcaRandom,
    PcaTop,
    RandomProjection,
    RandomSelection,
    MaxActivation,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::CcaHighest,
        Method::CcaLowest,
        Method::CcaRandom,
        Method::PcaTop,
        Method::RandomProjection,
        Method::RandomSelection,
        Method::MaxActivation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::CcaHighest => "cca_highest",
            Method::CcaLowest => "cca_lowest",
            Method::CcaRandom => "cca_random",
            Method::PcaTop => "pca_top",
            Method::RandomProjection => "random_projection",
            Method::RandomSelection => "random_selection",
            Method::MaxActivation => "max_activation",
        }
    }

    pub fn uses_cca(self) -> bool {
        matches!(self, Method::CcaHighest | Method::CcaLowest | Method::CcaRandom)
    }

    pub fn is_random(self) -> bool {
        matches!(
            self,
            Method::CcaRandom | Method::RandomProjection | Method::RandomSelection
        )
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown projection method {s:?}")))
    }
}

/// An idempotent rank-n_s linear map on the feature space, acting on
/// centered coordinates.
#[derive(Debug, Clone)]
pub struct Projector {
    /// n×n projection matrix; applied to row vectors as `(x − mean)·Pᵀ`.
    pub matrix: Matrix,
    /// Rank of the projection.
    pub rank: usize,
    pub method: Method,
    /// Seed used for random methods.
    pub seed: Option<u64>,
    /// Centering offset re-added after projection.
    pub mean: Array1<f64>,
}

/// Everything a method might need to construct its projector. Methods take
/// only what they use and report a missing piece as an error.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectorContext<'a> {
    /// Fitted CCA basis and the side being projected, for the cca_* methods.
    pub cca: Option<(&'a CcaBasis, Side)>,
    /// PCA of the features, for pca_top.
    pub pca: Option<&'a PcaModel>,
    /// Reference activations (training split), for max_activation.
    pub reference: Option<&'a FeatureMatrix>,
    /// Seed for the random methods.
    pub seed: Option<u64>,
}

/// Builds the rank-`n_s` projector of `method` for an `n`-dimensional
/// feature space.
pub fn make_projector(
    method: Method,
    n_s: usize,
    n: usize,
    ctx: &ProjectorContext<'_>,
) -> Result<Projector> {
    if n_s == 0 || n_s > n {
        return Err(Error::InvalidArgument(format!(
            "subspace dimension must satisfy 1 ≤ n_s ≤ {n}, got {n_s}"
        )));
    }
    // Projecting on the full space leaves the data unchanged, whatever the
    // method.
    if n_s == n {
        return Ok(Projector {
            matrix: Matrix::eye(n),
            rank: n,
            method,
            seed: None,
            mean: Array1::zeros(n),
        });
    }

    match method {
        Method::CcaHighest | Method::CcaLowest | Method::CcaRandom => {
            let (basis, side) = ctx.cca.ok_or_else(|| {
                Error::InvalidArgument(format!("{method} needs a fitted CCA basis in the context"))
            })?;
            if basis.input_dim(side) != n {
                return Err(Error::dims(
                    "make_projector",
                    format!("{n} feature columns"),
                    format!("{} on CCA side {}", basis.input_dim(side), side.index()),
                ));
            }
            if n_s > basis.k {
                return Err(Error::InvalidArgument(format!(
                    "{method}: n_s = {n_s} exceeds the {} canonical components",
                    basis.k
                )));
            }
            let (selection, seed) = match method {
                Method::CcaHighest => ((0..n_s).collect::<Vec<_>>(), None),
                Method::CcaLowest => (((basis.k - n_s)..basis.k).collect(), None),
                Method::CcaRandom => {
                    let seed = ctx.seed.ok_or_else(|| {
                        Error::InvalidArgument("cca_random needs a seed in the context".into())
                    })?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut sel = index_sample(&mut rng, basis.k, n_s).into_vec();
                    sel.sort_unstable();
                    (sel, Some(seed))
                }
                _ => unreachable!(),
            };
            let forward = basis.forward_map(side); // n×k
            let backward = basis.backward_map(side); // k×n
            let mut f_sel = Matrix::zeros((n, n_s));
            let mut g_sel = Matrix::zeros((n_s, n));
            for (slot, &c) in selection.iter().enumerate() {
                f_sel.column_mut(slot).assign(&forward.column(c));
                g_sel.row_mut(slot).assign(&backward.row(c));
            }
            // Row convention maps x → x·F_sel·G_sel; store the column-
            // convention matrix P with apply(x) = (x − mean)·Pᵀ.
            let p = f_sel.dot(&g_sel).t().to_owned();
            Ok(Projector {
                matrix: p,
                rank: n_s,
                method,
                seed,
                mean: basis.mean(side).clone(),
            })
        }
        Method::PcaTop => {
            let model = ctx.pca.ok_or_else(|| {
                Error::InvalidArgument("pca_top needs a fitted PCA model in the context".into())
            })?;
            if model.input_dim() != n {
                return Err(Error::dims(
                    "make_projector",
                    format!("{n} feature columns"),
                    format!("{} in the PCA model", model.input_dim()),
                ));
            }
            if n_s > model.k() {
                return Err(Error::InvalidArgument(format!(
                    "pca_top: n_s = {n_s} exceeds the {} retained components",
                    model.k()
                )));
            }
            let c_sel = model.components.slice(ndarray::s![.., ..n_s]).to_owned();
            Ok(Projector {
                matrix: c_sel.dot(&c_sel.t()),
                rank: n_s,
                method,
                seed: None,
                mean: model.mean.clone(),
            })
        }
        Method::RandomProjection => {
            let seed = ctx.seed.ok_or_else(|| {
                Error::InvalidArgument("random_projection needs a seed in the context".into())
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_orthonormal(n, n_s, &mut rng)?;
            Ok(Projector {
                matrix: q.dot(&q.t()),
                rank: n_s,
                method,
                seed: Some(seed),
                mean: Array1::zeros(n),
            })
        }
        Method::RandomSelection => {
            let seed = ctx.seed.ok_or_else(|| {
                Error::InvalidArgument("random_selection needs a seed in the context".into())
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = index_sample(&mut rng, n, n_s).into_vec();
            Ok(Projector {
                matrix: coordinate_mask(n, &keep),
                rank: n_s,
                method,
                seed: Some(seed),
                mean: Array1::zeros(n),
            })
        }
        Method::MaxActivation => {
            let reference = ctx.reference.ok_or_else(|| {
                Error::InvalidArgument(
                    "max_activation needs a reference feature matrix in the context".into(),
                )
            })?;
            if reference.ncols() != n {
                return Err(Error::dims(
                    "make_projector",
                    format!("{n} feature columns"),
                    format!("{} in the reference matrix", reference.ncols()),
                ));
            }
            linalg::ensure_finite(reference, "max_activation reference")?;
            // Mean |activation| per coordinate over the reference set;
            // ties resolved toward the lower index.
            let s = reference.nrows() as f64;
            let mut stats: Vec<(usize, f64)> = (0..n)
                .map(|j| (j, reference.column(j).iter().map(|v| v.abs()).sum::<f64>() / s))
                .collect();
            stats.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let keep: Vec<usize> = stats.iter().take(n_s).map(|&(j, _)| j).collect();
            Ok(Projector {
                matrix: coordinate_mask(n, &keep),
                rank: n_s,
                method,
                seed: None,
                mean: Array1::zeros(n),
            })
        }
    }
}

fn coordinate_mask(n: usize, keep: &[usize]) -> Matrix {
    let mut p = Matrix::zeros((n, n));
    for &j in keep {
        p[[j, j]] = 1.0;
    }
    p
}

/// Applies the projection: `mean + (X − mean)·Pᵀ`.
pub fn apply(p: &Projector, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    let n = p.matrix.nrows();
    if x.ncols() != n {
        return Err(Error::dims(
            "projector apply",
            format!("{n} columns"),
            format!("{}", x.ncols()),
        ));
    }
    Ok((x - &p.mean).dot(&p.matrix.t()) + &p.mean)
}
