//! Late fusion of two sensors' networks: sum the leading canonical variables
//! and classify the sum, sum the class logits directly, or average the
//! softmax probabilities, with an equivalence report comparing all three.

use serde::{Deserialize, Serialize};

use crate::cca::{canonical_variables, CcaBasis, Side};
use crate::error::{Error, Result};
use crate::heads::{
    accuracy, evaluate, logits, retrain_head, row_argmax, softmax_predict, HeadInit,
    LabeledFeatures, LinearHead, Metric, TrainHyper,
};
use crate::FeatureMatrix;

/// Outcome of the fusion-equivalence experiment on one validation split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionReport {
    /// Accuracy of the classifier retrained on summed canonical variables.
    pub acc_cca_fusion: f64,
    /// Accuracy of per-class logit summation.
    pub acc_logit_sum: f64,
    /// Accuracy of softmax-probability averaging.
    pub acc_prob_average: f64,
    /// Validation accuracy of each sensor's own head.
    pub per_sensor: Vec<(String, f64)>,
    /// Fraction of validation samples where the CCA-fusion prediction equals
    /// the logit-sum prediction.
    pub agreement: f64,
    /// Number of canonical pairs summed.
    pub k_used: usize,
}

/// One sensor's artifacts as the fusion functions need them.
#[derive(Debug, Clone, Copy)]
pub struct SensorRef<'a> {
    pub name: &'a str,
    pub train: &'a LabeledFeatures,
    pub val: &'a LabeledFeatures,
    pub head: &'a LinearHead,
}

fn check_alignment(a: &LabeledFeatures, b: &LabeledFeatures, what: &'static str) -> Result<()> {
    if a.len() != b.len() || a.labels != b.labels {
        return Err(Error::InvalidArgument(format!(
            "{what}: the two sensors' rows are not aligned"
        )));
    }
    Ok(())
}

/// Sums the first `k` canonical variables of both sides on the train split,
/// fits a multinomial logistic-regression classifier on the sum, and scores
/// it on the summed validation split. Returns the classifier, its validation
/// accuracy, and its validation predictions.
pub fn cca_fusion(
    basis: &CcaBasis,
    train1: &LabeledFeatures,
    train2: &LabeledFeatures,
    val1: &LabeledFeatures,
    val2: &LabeledFeatures,
    k: usize,
    n_classes: usize,
    hyper: &TrainHyper,
) -> Result<(LinearHead, f64, Vec<usize>)> {
    if k == 0 || k > basis.k {
        return Err(Error::InvalidArgument(format!(
            "cca_fusion: k must lie in 1..={}, got {k}",
            basis.k
        )));
    }
    check_alignment(train1, train2, "cca_fusion train")?;
    check_alignment(val1, val2, "cca_fusion val")?;

    let fuse = |d1: &LabeledFeatures, d2: &LabeledFeatures| -> Result<LabeledFeatures> {
        let c1 = canonical_variables(basis, &d1.features, Side::One)?;
        let c2 = canonical_variables(basis, &d2.features, Side::Two)?;
        let summed =
            &c1.slice(ndarray::s![.., ..k]) + &c2.slice(ndarray::s![.., ..k]);
        d1.with_features(summed)
    };
    let fused_train = fuse(train1, train2)?;
    let fused_val = fuse(val1, val2)?;

    let classifier = retrain_head(&fused_train, HeadInit::Random { n_classes }, hyper)?;
    let acc = evaluate(&classifier, &fused_val, Metric::Accuracy)?;
    let (_, preds) = softmax_predict(&logits(&classifier, &fused_val.features)?)?;
    Ok((classifier, acc, preds))
}

/// Argmax over the per-class sum of both networks' logits.
pub fn logit_sum(
    head1: &LinearHead,
    x1: &FeatureMatrix,
    head2: &LinearHead,
    x2: &FeatureMatrix,
) -> Result<Vec<usize>> {
    if head1.n_classes() != head2.n_classes() {
        return Err(Error::dims(
            "logit_sum",
            format!("{} classes", head1.n_classes()),
            format!("{} classes", head2.n_classes()),
        ));
    }
    if x1.nrows() != x2.nrows() {
        return Err(Error::dims(
            "logit_sum",
            format!("{} rows", x1.nrows()),
            format!("{} rows", x2.nrows()),
        ));
    }
    let sum = logits(head1, x1)? + logits(head2, x2)?;
    Ok(sum.rows().into_iter().map(row_argmax).collect())
}

/// Argmax of the mean of both networks' softmax probabilities.
pub fn prob_average(
    head1: &LinearHead,
    x1: &FeatureMatrix,
    head2: &LinearHead,
    x2: &FeatureMatrix,
) -> Result<Vec<usize>> {
    if head1.n_classes() != head2.n_classes() {
        return Err(Error::dims(
            "prob_average",
            format!("{} classes", head1.n_classes()),
            format!("{} classes", head2.n_classes()),
        ));
    }
    if x1.nrows() != x2.nrows() {
        return Err(Error::dims(
            "prob_average",
            format!("{} rows", x1.nrows()),
            format!("{} rows", x2.nrows()),
        ));
    }
    let (p1, _) = softmax_predict(&logits(head1, x1)?)?;
    let (p2, _) = softmax_predict(&logits(head2, x2)?)?;
    let mean = (p1 + p2) * 0.5;
    Ok(mean.rows().into_iter().map(row_argmax).collect())
}

/// Runs the full comparison: CCA fusion with `k` summed components (the
/// class count by default), logit summation, probability averaging, and the
/// per-sensor baselines, reporting accuracies and prediction agreement.
pub fn equivalence_test(
    basis: &CcaBasis,
    s1: SensorRef<'_>,
    s2: SensorRef<'_>,
    k: Option<usize>,
    hyper: &TrainHyper,
) -> Result<FusionReport> {
    let n_classes = s1.head.n_classes();
    if s2.head.n_classes() != n_classes {
        return Err(Error::dims(
            "equivalence_test",
            format!("{n_classes} classes"),
            format!("{} classes", s2.head.n_classes()),
        ));
    }
    let k_used = k.unwrap_or(n_classes);

    let (_classifier, acc_cca_fusion, fusion_preds) = cca_fusion(
        basis, s1.train, s2.train, s1.val, s2.val, k_used, n_classes, hyper,
    )?;

    let sum_preds = logit_sum(s1.head, &s1.val.features, s2.head, &s2.val.features)?;
    let avg_preds = prob_average(s1.head, &s1.val.features, s2.head, &s2.val.features)?;

    let labels = &s1.val.labels;
    let acc_logit_sum = accuracy(&sum_preds, labels)?;
    let acc_prob_average = accuracy(&avg_preds, labels)?;
    let agreement = fusion_preds
        .iter()
        .zip(sum_preds.iter())
        .filter(|(a, b)| a == b)
        .count() as f64
        / labels.len() as f64;

    let per_sensor = vec![
        (s1.name.to_string(), evaluate(s1.head, s1.val, Metric::Accuracy)?),
        (s2.name.to_string(), evaluate(s2.head, s2.val, Metric::Accuracy)?),
    ];

    Ok(FusionReport {
        acc_cca_fusion,
        acc_logit_sum,
        acc_prob_average,
        per_sensor,
        agreement,
        k_used,
    })
}
