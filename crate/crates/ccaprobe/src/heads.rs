//! Linear classification heads: logits, softmax prediction, accuracy and
//! macro-F1, and multinomial logistic-regression retraining on projected
//! features.

use ndarray::{Array1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::FeatureMatrix;

/// Weights and bias of a classification layer. The rows of `weights` are the
/// per-class directions whose scalar product with a feature vector gives that
/// class's logit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearHead {
    /// n_c × n weight matrix.
    pub weights: Matrix,
    /// Per-class bias, length n_c.
    pub bias: Array1<f64>,
}

impl LinearHead {
    pub fn new(weights: Matrix, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::dims(
                "LinearHead",
                format!("{} bias entries", weights.nrows()),
                format!("{}", bias.len()),
            ));
        }
        if weights.nrows() < 2 {
            return Err(Error::InvalidArgument(
                "a head needs at least 2 classes".into(),
            ));
        }
        linalg::ensure_finite(&weights, "LinearHead weights")?;
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "LinearHead bias contains non-finite entries".into(),
            ));
        }
        Ok(LinearHead { weights, bias })
    }

    /// Number of classes.
    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }

    /// Feature dimension.
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// Feature rows with an aligned class-index label per row.
#[derive(Debug, Clone)]
pub struct LabeledFeatures {
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
}

impl LabeledFeatures {
    pub fn new(features: FeatureMatrix, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::dims(
                "LabeledFeatures",
                format!("{} labels", features.nrows()),
                format!("{}", labels.len()),
            ));
        }
        Ok(LabeledFeatures { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Same labels, different feature matrix (e.g. after projection).
    pub fn with_features(&self, features: FeatureMatrix) -> Result<Self> {
        Self::new(features, self.labels.clone())
    }
}

/// Evaluation metric for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MacroF1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::MacroF1 => "macro_f1",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Metric::Accuracy),
            "macro_f1" => Ok(Metric::MacroF1),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

/// Y = X·Wᵀ + b, one row of class scores per sample.
pub fn logits(head: &LinearHead, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.ncols() != head.input_dim() {
        return Err(Error::dims(
            "logits",
            format!("{} feature columns", head.input_dim()),
            format!("{}", x.ncols()),
        ));
    }
    Ok(x.dot(&head.weights.t()) + &head.bias)
}

/// Row-wise stable softmax plus argmax (ties to the lowest class index).
pub fn softmax_predict(y: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<usize>)> {
    linalg::ensure_finite(y, "softmax_predict")?;
    let mut probs = y.clone();
    let mut argmax = Vec::with_capacity(y.nrows());
    for mut row in probs.axis_iter_mut(Axis(0)) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    for row in y.axis_iter(Axis(0)) {
        argmax.push(row_argmax(row));
    }
    Ok((probs, argmax))
}

/// First index of the row maximum.
pub(crate) fn row_argmax(row: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    let mut best_v = row[0];
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Fraction of correct argmax predictions.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "accuracy needs non-empty aligned predictions and labels".into(),
        ));
    }
    let correct = predictions
        .iter()
        .zip(labels.iter())
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Unweighted mean over all `n_classes` of the per-class F1 score; classes
/// absent from both predictions and labels contribute 0.
pub fn macro_f1(predictions: &[usize], labels: &[usize], n_classes: usize) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "macro_f1 needs non-empty aligned predictions and labels".into(),
        ));
    }
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fnn = vec![0usize; n_classes];
    for (&p, &l) in predictions.iter().zip(labels.iter()) {
        if p >= n_classes || l >= n_classes {
            return Err(Error::InvalidArgument(format!(
                "class index out of range: prediction {p}, label {l}, n_classes {n_classes}"
            )));
        }
        if p == l {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fnn[l] += 1;
        }
    }
    let mut sum = 0.0;
    for c in 0..n_classes {
        let denom = 2 * tp[c] + fp[c] + fnn[c];
        if denom > 0 {
            sum += 2.0 * tp[c] as f64 / denom as f64;
        }
    }
    Ok(sum / n_classes as f64)
}

/// Scores the head on labeled data with the chosen metric.
pub fn evaluate(head: &LinearHead, data: &LabeledFeatures, metric: Metric) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("evaluate: empty data".into()));
    }
    let y = logits(head, &data.features)?;
    let (_, preds) = softmax_predict(&y)?;
    match metric {
        Metric::Accuracy => accuracy(&preds, &data.labels),
        Metric::MacroF1 => macro_f1(&preds, &data.labels, head.n_classes()),
    }
}

/// Hyperparameters of the mini-batch gradient-descent trainers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainHyper {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    #[serde(default)]
    pub weight_decay: f64,
}

impl TrainHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if self.batch == 0 {
            return Err(Error::InvalidArgument("batch size must be ≥ 1".into()));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::InvalidArgument(
                "weight_decay must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Same hyperparameters, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        TrainHyper { seed, ..self.clone() }
    }
}

/// Initial parameters for head retraining.
#[derive(Debug, Clone)]
pub enum HeadInit {
    /// Start from an existing head (e.g. the trained classification layer).
    Warm(LinearHead),
    /// Small seeded Gaussian weights, zero bias.
    Random { n_classes: usize },
}

/// Mean cross-entropy of the head on the data, plus the L2 penalty
/// 0.5·wd·‖W‖² (bias unregularized).
pub fn head_loss(head: &LinearHead, data: &LabeledFeatures, weight_decay: f64) -> Result<f64> {
    let y = logits(head, &data.features)?;
    let mut total = 0.0;
    for (row, &label) in y.axis_iter(Axis(0)).zip(data.labels.iter()) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let logsum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        total += logsum - row[label];
    }
    let penalty = 0.5 * weight_decay * head.weights.iter().map(|w| w * w).sum::<f64>();
    Ok(total / data.len() as f64 + penalty)
}

/// Cross-entropy gradient of the head on a batch: (∂W, ∂b).
pub fn head_gradient(
    head: &LinearHead,
    data: &LabeledFeatures,
    weight_decay: f64,
) -> Result<(Matrix, Array1<f64>)> {
    let y = logits(head, &data.features)?;
    let (mut g, _) = softmax_predict(&y)?;
    for (i, &label) in data.labels.iter().enumerate() {
        g[[i, label]] -= 1.0;
    }
    let scale = 1.0 / data.len() as f64;
    let grad_w = g.t().dot(&data.features) * scale + &(&head.weights * weight_decay);
    let grad_b = g.sum_axis(Axis(0)) * scale;
    Ok((grad_w, grad_b))
}

/// Multinomial logistic regression by mini-batch gradient descent on
/// cross-entropy. Deterministic given the seed; returns the epoch snapshot
/// with the lowest full-data loss, so the result never scores worse than the
/// initialization.
pub fn retrain_head(
    train: &LabeledFeatures,
    init: HeadInit,
    hyper: &TrainHyper,
) -> Result<LinearHead> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("retrain_head: empty data".into()));
    }
    hyper.validate()?;
    let n = train.features.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);

    let mut head = match init {
        HeadInit::Warm(h) => {
            if h.input_dim() != n {
                return Err(Error::dims(
                    "retrain_head",
                    format!("{} feature columns", h.input_dim()),
                    format!("{}", n),
                ));
            }
            h
        }
        HeadInit::Random { n_classes } => {
            let mut w = Matrix::zeros((n_classes, n));
            for v in w.iter_mut() {
                *v = rng.sample::<f64, _>(StandardNormal) * 0.01;
            }
            LinearHead::new(w, Array1::zeros(n_classes))?
        }
    };
    if train.labels.iter().any(|&l| l >= head.n_classes()) {
        return Err(Error::InvalidArgument(
            "retrain_head: label outside the head's class range".into(),
        ));
    }
    if hyper.epochs == 0 {
        return Ok(head);
    }

    let s = train.len();
    let mut best_loss = head_loss(&head, train, hyper.weight_decay)?;
    let mut best = head.clone();
    let mut order: Vec<usize> = (0..s).collect();

    for _epoch in 0..hyper.epochs {
        shuffle(&mut order, &mut rng);
        for chunk in order.chunks(hyper.batch) {
            let batch = take_rows(train, chunk);
            let (gw, gb) = head_gradient(&head, &batch, hyper.weight_decay)?;
            head.weights.scaled_add(-hyper.lr, &gw);
            head.bias.scaled_add(-hyper.lr, &gb);
        }
        let loss = head_loss(&head, train, hyper.weight_decay)?;
        if !loss.is_finite() {
            return Err(Error::Numerical(
                "retrain_head diverged: loss is not finite".into(),
            ));
        }
        if loss < best_loss {
            best_loss = loss;
            best = head.clone();
        }
    }
    Ok(best)
}

pub(crate) fn shuffle<R: Rng>(order: &mut [usize], rng: &mut R) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

pub(crate) fn take_rows(data: &LabeledFeatures, idx: &[usize]) -> LabeledFeatures {
    let mut features = Matrix::zeros((idx.len(), data.features.ncols()));
    let mut labels = Vec::with_capacity(idx.len());
    for (slot, &i) in idx.iter().enumerate() {
        features.row_mut(slot).assign(&data.features.row(i));
        labels.push(data.labels[i]);
    }
    LabeledFeatures { features, labels }
}
