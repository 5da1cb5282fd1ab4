//! Projection-performance curves: sweep a reduction method over subspace
//! sizes and repeats, scoring the head before and after retraining on the
//! projected features, plus the cross-sensor grid where the CCA basis comes
//! from a different sensor.
//!
//! The (n_s × repeat) sweep runs in parallel; every job derives its own seed
//! from the master seed and its coordinates, so results are identical
//! whatever the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cca::{fit_cca, CcaBasis, Side};
use crate::error::{Error, Result};
use crate::heads::{
    evaluate, retrain_head, HeadInit, LabeledFeatures, LinearHead, Metric, TrainHyper,
};
use crate::projectors::{apply, make_projector, Method, ProjectorContext};
use crate::seed::{derive, tag};
use crate::{FeatureMatrix, Matrix};

/// One measured sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_s: usize,
    pub repeat: usize,
    pub metric_before: f64,
    pub metric_after: f64,
}

/// Mean and population standard deviation over the repeats of one n_s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub n_s: usize,
    pub mean_before: f64,
    pub std_before: f64,
    pub mean_after: f64,
    pub std_after: f64,
}

/// Full curve of one method on one (basis sensor → evaluated sensor) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveResult {
    pub method: Method,
    /// (sensor providing the CCA partner data, sensor being evaluated).
    /// Non-CCA methods use the evaluated sensor on both slots.
    pub sensor_pair: (String, String),
    pub metric: Metric,
    pub points: Vec<CurvePoint>,
    pub aggregate: Vec<AggregatePoint>,
}

impl CurveResult {
    /// Rebuilds a curve (schedule and aggregates included) from its points.
    pub fn from_points(
        method: Method,
        sensor_pair: (String, String),
        metric: Metric,
        points: Vec<CurvePoint>,
    ) -> CurveResult {
        let mut schedule: Vec<usize> = points.iter().map(|p| p.n_s).collect();
        schedule.sort_unstable();
        schedule.dedup();
        let aggregate = schedule
            .iter()
            .map(|&n_s| {
                let before: Vec<f64> = points
                    .iter()
                    .filter(|p| p.n_s == n_s)
                    .map(|p| p.metric_before)
                    .collect();
                let after: Vec<f64> = points
                    .iter()
                    .filter(|p| p.n_s == n_s)
                    .map(|p| p.metric_after)
                    .collect();
                let (mean_before, std_before) = mean_std(&before);
                let (mean_after, std_after) = mean_std(&after);
                AggregatePoint {
                    n_s,
                    mean_before,
                    std_before,
                    mean_after,
                    std_after,
                }
            })
            .collect();
        CurveResult {
            method,
            sensor_pair,
            metric,
            points,
            aggregate,
        }
    }

    /// Aggregate row for a given subspace size.
    pub fn at(&self, n_s: usize) -> Option<&AggregatePoint> {
        self.aggregate.iter().find(|p| p.n_s == n_s)
    }

    /// Baseline row (n_s = feature dimension), present in every sweep.
    pub fn baseline(&self) -> &AggregatePoint {
        self.aggregate.last().expect("curves are never empty")
    }
}

/// Subspace sizes to sweep: every size up to 2·n_c for resolution around the
/// class count, then powers of two, then the full dimension.
pub fn component_schedule(n_c: usize, n: usize) -> Result<Vec<usize>> {
    if n_c == 0 {
        return Err(Error::InvalidArgument("component_schedule: n_c must be ≥ 1".into()));
    }
    if n < n_c {
        return Err(Error::InvalidArgument(format!(
            "component_schedule: n = {n} is smaller than n_c = {n_c}"
        )));
    }
    let mut schedule: Vec<usize> = (1..=(2 * n_c).min(n)).collect();
    let mut p = 1usize;
    while p < n {
        if p > 2 * n_c {
            schedule.push(p);
        }
        p = p.saturating_mul(2);
    }
    schedule.push(n);
    schedule.sort_unstable();
    schedule.dedup();
    Ok(schedule)
}

/// Everything `run_curve` needs to build projectors for one method.
/// CCA methods fit one basis per repeat when several are supplied (fresh
/// partner initializations); other methods ignore the bases.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurveContext<'a> {
    /// Per-repeat CCA bases plus the side the evaluated features live on.
    pub cca: Option<(&'a [CcaBasis], Side)>,
    /// PCA of the evaluated training features, for pca_top.
    pub pca: Option<&'a crate::linalg::PcaModel>,
    /// Reference activations for max_activation (training split).
    pub reference: Option<&'a FeatureMatrix>,
}

/// Sweep parameters shared by every job of one curve.
#[derive(Debug, Clone)]
pub struct CurveSpec<'a> {
    pub method: Method,
    pub repeats: usize,
    pub retrain: &'a TrainHyper,
    pub master_seed: u64,
    pub metric: Metric,
    /// (sensor providing the CCA partner data, sensor being evaluated).
    pub sensor_pair: (String, String),
    /// Replaces the default component schedule when set; values are clamped
    /// to the feature dimension and the full-dimension point is always kept.
    pub schedule_override: Option<&'a [usize]>,
}

/// Sweeps one method over the component schedule with the given number of
/// repeats. `metric_before` scores the trained head on projected validation
/// features; `metric_after` scores a head retrained on the projected
/// training split. Deterministic given `spec.master_seed`.
pub fn run_curve(
    train: &LabeledFeatures,
    val: &LabeledFeatures,
    head: &LinearHead,
    ctx: &CurveContext<'_>,
    spec: &CurveSpec<'_>,
) -> Result<CurveResult> {
    let method = spec.method;
    let repeats = spec.repeats;
    if repeats == 0 {
        return Err(Error::InvalidArgument("run_curve: repeats must be ≥ 1".into()));
    }
    if train.features.ncols() != val.features.ncols() {
        return Err(Error::dims(
            "run_curve",
            format!("{} columns in train and val", train.features.ncols()),
            format!("{}", val.features.ncols()),
        ));
    }
    let n = train.features.ncols();
    let n_c = head.n_classes();
    let schedule = match spec.schedule_override {
        Some(values) => {
            if values.is_empty() || values.iter().any(|&v| v == 0) {
                return Err(Error::InvalidArgument(
                    "schedule override must list positive subspace sizes".into(),
                ));
            }
            let mut s: Vec<usize> = values.iter().map(|&v| v.min(n)).collect();
            s.push(n);
            s.sort_unstable();
            s.dedup();
            s
        }
        None => component_schedule(n_c, n)?,
    };

    // Interior points beyond the available components carry no additional
    // subspace for basis-bound methods; skip them. The n_s = n endpoint is
    // the identity for every method and is always kept.
    let cap = match method {
        Method::CcaHighest | Method::CcaLowest | Method::CcaRandom => {
            let (bases, _) = ctx.cca.ok_or_else(|| {
                Error::InvalidArgument(format!("{method} needs CCA bases in the curve context"))
            })?;
            if bases.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "{method}: the curve context supplies no CCA bases"
                )));
            }
            bases.iter().map(|b| b.k).min().unwrap()
        }
        Method::PcaTop => {
            let model = ctx.pca.ok_or_else(|| {
                Error::InvalidArgument("pca_top needs a PCA model in the curve context".into())
            })?;
            model.k()
        }
        _ => n,
    };
    let schedule: Vec<usize> = schedule
        .into_iter()
        .filter(|&n_s| n_s <= cap || n_s == n)
        .collect();

    let jobs: Vec<(usize, usize)> = schedule
        .iter()
        .flat_map(|&n_s| (0..repeats).map(move |r| (n_s, r)))
        .collect();

    let points: Vec<CurvePoint> = jobs
        .par_iter()
        .map(|&(n_s, repeat)| -> Result<CurvePoint> {
            let job_seed = derive(
                spec.master_seed,
                &[tag("curve"), tag(method.name()), n_s as u64, repeat as u64],
            );
            let proj_ctx = ProjectorContext {
                cca: ctx
                    .cca
                    .map(|(bases, side)| (&bases[repeat % bases.len()], side)),
                pca: ctx.pca,
                reference: ctx.reference,
                seed: Some(job_seed),
            };
            let projector = make_projector(method, n_s, n, &proj_ctx)?;
            let proj_val = val.with_features(apply(&projector, &val.features)?)?;
            let metric_before = evaluate(head, &proj_val, spec.metric)?;

            let proj_train = train.with_features(apply(&projector, &train.features)?)?;
            let retrained = retrain_head(
                &proj_train,
                HeadInit::Warm(head.clone()),
                &spec.retrain.with_seed(derive(job_seed, &[tag("retrain")])),
            )?;
            let metric_after = evaluate(&retrained, &proj_val, spec.metric)?;

            Ok(CurvePoint {
                n_s,
                repeat,
                metric_before,
                metric_after,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CurveResult::from_points(
        method,
        spec.sensor_pair.clone(),
        spec.metric,
        points,
    ))
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trained artifacts of one sensor as the grid needs them.
#[derive(Debug, Clone)]
pub struct SensorData {
    pub name: String,
    /// Penultimate features of the evaluated network on the training split.
    pub train: LabeledFeatures,
    /// Penultimate features on the validation split.
    pub val: LabeledFeatures,
    pub head: LinearHead,
    /// Training-split features of additional networks trained on the same
    /// sensor with fresh initializations; used as CCA partners on diagonal
    /// cells, one per repeat.
    pub partner_train: Vec<Matrix>,
}

/// One cell of the cross-sensor grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub basis_sensor: String,
    pub evaluated_sensor: String,
    pub curve: CurveResult,
}

/// Grid sweep parameters.
#[derive(Debug, Clone)]
pub struct GridSpec<'a> {
    pub repeats: usize,
    pub variance_keep: f64,
    pub retrain: &'a TrainHyper,
    pub master_seed: u64,
    pub metric: Metric,
    pub schedule_override: Option<&'a [usize]>,
}

/// Runs `cca_highest` curves for every ordered (basis sensor, evaluated
/// sensor) pair. Diagonal cells refit the basis per repeat against a fresh
/// initialization of the same sensor; off-diagonal cells fit one basis
/// against the partner sensor's features.
pub fn run_grid(sensors: &[SensorData], spec: &GridSpec<'_>) -> Result<Vec<GridCell>> {
    if sensors.len() < 2 {
        return Err(Error::InvalidArgument(
            "run_grid needs at least 2 sensors".into(),
        ));
    }
    let mut cells = Vec::with_capacity(sensors.len() * sensors.len());
    for evaluated in sensors {
        for partner in sensors {
            let bases: Vec<CcaBasis> = if partner.name == evaluated.name {
                if evaluated.partner_train.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "run_grid: diagonal cell for {} needs partner initializations",
                        evaluated.name
                    )));
                }
                (0..spec.repeats)
                    .map(|r| {
                        let p = &evaluated.partner_train[r % evaluated.partner_train.len()];
                        fit_cca(&evaluated.train.features, p, spec.variance_keep)
                    })
                    .collect::<Result<_>>()?
            } else {
                vec![fit_cca(
                    &evaluated.train.features,
                    &partner.train.features,
                    spec.variance_keep,
                )?]
            };
            let ctx = CurveContext {
                cca: Some((&bases, Side::One)),
                ..Default::default()
            };
            let curve = run_curve(
                &evaluated.train,
                &evaluated.val,
                &evaluated.head,
                &ctx,
                &CurveSpec {
                    method: Method::CcaHighest,
                    repeats: spec.repeats,
                    retrain: spec.retrain,
                    master_seed: derive(
                        spec.master_seed,
                        &[tag("grid"), tag(&partner.name), tag(&evaluated.name)],
                    ),
                    metric: spec.metric,
                    sensor_pair: (partner.name.clone(), evaluated.name.clone()),
                    schedule_override: spec.schedule_override,
                },
            )?;
            cells.push(GridCell {
                basis_sensor: partner.name.clone(),
                evaluated_sensor: evaluated.name.clone(),
                curve,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fit_pca;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn schedule_matches_reference_cases() {
        let mut expect: Vec<usize> = (1..=16).collect();
        expect.extend([32, 64, 128]);
        assert_eq!(component_schedule(8, 128).unwrap(), expect);

        let mut expect: Vec<usize> = (1..=20).collect();
        expect.extend([32, 64]);
        assert_eq!(component_schedule(10, 64).unwrap(), expect);

        assert_eq!(component_schedule(2, 4).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn schedule_rejects_small_n() {
        assert!(component_schedule(8, 6).is_err());
        // Between n_c and 2·n_c the schedule clamps to n.
        assert_eq!(
            component_schedule(8, 12).unwrap(),
            (1..=12).collect::<Vec<_>>()
        );
    }

    /// Small labeled task with a trained head, for curve smoke tests.
    fn small_task(seed: u64) -> (LabeledFeatures, LabeledFeatures, LinearHead) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_classes = 3;
        let dim = 8;
        let mut means = Matrix::zeros((n_classes, dim));
        for v in means.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * 2.0;
        }
        let mut make = |s: usize| {
            let mut feats = Matrix::zeros((s, dim));
            let mut labels = Vec::new();
            for i in 0..s {
                let c = rng.gen_range(0..n_classes);
                labels.push(c);
                for j in 0..dim {
                    feats[[i, j]] = means[[c, j]] + rng.sample::<f64, _>(StandardNormal);
                }
            }
            LabeledFeatures::new(feats, labels).unwrap()
        };
        let train = make(1_200);
        let val = make(400);
        let hyper = TrainHyper {
            lr: 0.2,
            epochs: 40,
            batch: 64,
            seed: 1,
            weight_decay: 0.0,
        };
        let head = retrain_head(&train, HeadInit::Random { n_classes }, &hyper).unwrap();
        (train, val, head)
    }

    fn quick_retrain() -> TrainHyper {
        TrainHyper {
            lr: 0.2,
            epochs: 15,
            batch: 64,
            seed: 0,
            weight_decay: 0.0,
        }
    }

    fn spec<'a>(
        method: Method,
        repeats: usize,
        retrain: &'a TrainHyper,
        master_seed: u64,
    ) -> CurveSpec<'a> {
        CurveSpec {
            method,
            repeats,
            retrain,
            master_seed,
            metric: Metric::Accuracy,
            sensor_pair: ("s0".into(), "s0".into()),
            schedule_override: None,
        }
    }

    #[test]
    fn full_dimension_point_equals_baseline_exactly() {
        let (train, val, head) = small_task(5);
        let baseline = evaluate(&head, &val, Metric::Accuracy).unwrap();
        let pca = fit_pca(&train.features, 1.0).unwrap();
        let ctx = CurveContext {
            pca: Some(&pca),
            reference: Some(&train.features),
            ..Default::default()
        };
        let retrain = quick_retrain();
        for method in [Method::PcaTop, Method::RandomSelection, Method::MaxActivation] {
            let curve =
                run_curve(&train, &val, &head, &ctx, &spec(method, 2, &retrain, 99)).unwrap();
            let last = curve.baseline();
            assert_eq!(last.n_s, 8);
            assert_eq!(last.mean_before, baseline, "{method}");
            assert_eq!(last.std_before, 0.0);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (train, val, head) = small_task(6);
        let ctx = CurveContext {
            reference: Some(&train.features),
            ..Default::default()
        };
        let retrain = quick_retrain();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_curve(
                    &train,
                    &val,
                    &head,
                    &ctx,
                    &spec(Method::RandomProjection, 3, &retrain, 1234),
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.points, b.points);
        assert_eq!(a.aggregate, b.aggregate);
    }

    #[test]
    fn cca_curve_skips_interior_points_beyond_basis_rank() {
        let (train, val, head) = small_task(7);
        // Partner sees only 5 of the 8 dimensions, capping the basis at
        // k = 5; the interior points 6..7 vanish but n_s = 8 stays.
        let partner = train.features.slice(ndarray::s![.., ..5]).to_owned();
        let basis = fit_cca(&train.features, &partner, 1.0).unwrap();
        assert_eq!(basis.k, 5);
        let bases = vec![basis];
        let ctx = CurveContext {
            cca: Some((&bases, Side::One)),
            ..Default::default()
        };
        let retrain = quick_retrain();
        let curve = run_curve(
            &train,
            &val,
            &head,
            &ctx,
            &spec(Method::CcaHighest, 2, &retrain, 7),
        )
        .unwrap();
        let sizes: Vec<usize> = curve.aggregate.iter().map(|p| p.n_s).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4, 5, 8]);
    }

    #[test]
    fn schedule_override_is_respected() {
        let (train, val, head) = small_task(11);
        let ctx = CurveContext {
            reference: Some(&train.features),
            ..Default::default()
        };
        let retrain = quick_retrain();
        let override_schedule = [2usize, 4];
        let mut s = spec(Method::MaxActivation, 1, &retrain, 3);
        s.schedule_override = Some(&override_schedule);
        let curve = run_curve(&train, &val, &head, &ctx, &s).unwrap();
        let sizes: Vec<usize> = curve.aggregate.iter().map(|p| p.n_s).collect();
        assert_eq!(sizes, vec![2, 4, 8]);
    }

    #[test]
    fn retraining_does_not_systematically_hurt() {
        let (train, val, head) = small_task(8);
        let pca = fit_pca(&train.features, 1.0).unwrap();
        let ctx = CurveContext {
            pca: Some(&pca),
            ..Default::default()
        };
        let retrain = quick_retrain();
        let curve =
            run_curve(&train, &val, &head, &ctx, &spec(Method::PcaTop, 3, &retrain, 55)).unwrap();
        for agg in &curve.aggregate {
            assert!(
                agg.mean_after >= agg.mean_before - agg.std_before.max(0.01),
                "retraining hurt at n_s = {}: {} -> {}",
                agg.n_s,
                agg.mean_before,
                agg.mean_after
            );
        }
    }

    #[test]
    fn monotone_in_expectation_for_ordered_methods() {
        let (train, val, head) = small_task(9);
        let pca = fit_pca(&train.features, 1.0).unwrap();
        let ctx = CurveContext {
            pca: Some(&pca),
            ..Default::default()
        };
        let retrain = quick_retrain();
        let curve =
            run_curve(&train, &val, &head, &ctx, &spec(Method::PcaTop, 3, &retrain, 56)).unwrap();
        // No point sits more than 2 std (plus a small sampling floor) below
        // an earlier point.
        for (i, a) in curve.aggregate.iter().enumerate() {
            for b in curve.aggregate.iter().skip(i + 1) {
                let slack = 2.0 * (a.std_before + b.std_before) + 0.02;
                assert!(
                    b.mean_before >= a.mean_before - slack,
                    "dip from n_s={} ({}) to n_s={} ({})",
                    a.n_s,
                    a.mean_before,
                    b.n_s,
                    b.mean_before
                );
            }
        }
    }

    #[test]
    fn grid_needs_two_sensors_and_diagonal_partners() {
        let (train, val, head) = small_task(10);
        let sensor = SensorData {
            name: "s0".into(),
            train: train.clone(),
            val,
            head,
            partner_train: vec![],
        };
        let retrain = quick_retrain();
        let gspec = GridSpec {
            repeats: 2,
            variance_keep: 1.0,
            retrain: &retrain,
            master_seed: 3,
            metric: Metric::Accuracy,
            schedule_override: None,
        };
        assert!(run_grid(&[sensor.clone()], &gspec).is_err());
        let two = vec![sensor.clone(), SensorData { name: "s1".into(), ..sensor }];
        // Diagonal cells need partner initializations.
        assert!(run_grid(&two, &gspec).is_err());
    }
}
