//! Synthetic multi-sensor dataset generator and a small MLP trainer with
//! manual backpropagation. Stands in for full-scale network training so the
//! whole pipeline runs in seconds: each sensor observes a linear view of a
//! shared class-informative latent plus private nuisance dimensions and
//! noise, and a per-sensor MLP supplies penultimate features and a trained
//! classification head.

use ndarray::{Array1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heads::{
    shuffle, softmax_predict, take_rows, LabeledFeatures, LinearHead, TrainHyper,
};
use crate::linalg::Matrix;
use crate::seed::{derive, tag};
use crate::FeatureMatrix;

/// Spread of the class means in latent space; within-class spread is 1.
const CLASS_MEAN_SCALE: f64 = 1.7;

/// Parameters of the synthetic multi-sensor task.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Number of classes.
    #[serde(default = "default_n_classes")]
    pub n_classes: usize,
    /// Number of sensors observing the shared latent.
    #[serde(default = "default_n_sensors")]
    pub n_sensors: usize,
    /// Dimension of the class-informative latent.
    #[serde(default = "default_shared_dim")]
    pub shared_dim: usize,
    /// Sensor-private nuisance dimensions appended to each observation.
    #[serde(default = "default_nuisance_dim")]
    pub nuisance_dim: usize,
    /// Stddev of the additive observation noise; must be positive.
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    /// Per-sensor fraction in [0, 1] scaling how much class signal reaches
    /// that sensor. Length must equal `n_sensors`.
    #[serde(default = "default_informativeness")]
    pub sensor_informativeness: Vec<f64>,
    /// Training rows.
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    /// Validation rows.
    #[serde(default = "default_n_val")]
    pub n_val: usize,
    /// Generator seed. Not part of the config schema: pipelines derive it
    /// from the master seed.
    #[serde(skip)]
    pub seed: u64,
    /// Diagnostic switch: give every sensor the observation map of sensor 0,
    /// so sensors differ only in nuisance and noise.
    #[serde(default)]
    pub tied_sensor_maps: bool,
}

fn default_n_classes() -> usize {
    8
}
fn default_n_sensors() -> usize {
    2
}
fn default_shared_dim() -> usize {
    6
}
fn default_nuisance_dim() -> usize {
    4
}
fn default_noise_sigma() -> f64 {
    0.5
}
fn default_informativeness() -> Vec<f64> {
    vec![1.0, 0.7]
}
fn default_n_train() -> usize {
    8000
}
fn default_n_val() -> usize {
    2000
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl SyntheticSpec {
    /// Default task: 8 classes, two sensors with informativeness 1.0 / 0.7.
    pub fn with_seed(seed: u64) -> Self {
        SyntheticSpec {
            n_classes: default_n_classes(),
            n_sensors: default_n_sensors(),
            shared_dim: default_shared_dim(),
            nuisance_dim: default_nuisance_dim(),
            noise_sigma: default_noise_sigma(),
            sensor_informativeness: default_informativeness(),
            n_train: default_n_train(),
            n_val: default_n_val(),
            seed,
            tied_sensor_maps: false,
        }
    }

    /// Raw observation dimension of every sensor.
    pub fn sensor_dim(&self) -> usize {
        self.shared_dim + self.nuisance_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::InvalidArgument("n_classes must be ≥ 2".into()));
        }
        if self.n_sensors == 0 || self.shared_dim == 0 {
            return Err(Error::InvalidArgument(
                "n_sensors and shared_dim must be ≥ 1".into(),
            ));
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise_sigma must be positive".into(),
            ));
        }
        if self.sensor_informativeness.len() != self.n_sensors {
            return Err(Error::InvalidArgument(format!(
                "sensor_informativeness must list {} values, got {}",
                self.n_sensors,
                self.sensor_informativeness.len()
            )));
        }
        if self
            .sensor_informativeness
            .iter()
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::InvalidArgument(
                "sensor informativeness values must lie in [0, 1]".into(),
            ));
        }
        if self.n_train == 0 || self.n_val == 0 {
            return Err(Error::InvalidArgument(
                "n_train and n_val must be ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// Raw observations of one sensor, split into train and validation rows.
/// Rows are aligned across sensors: row i of every sensor comes from the
/// same underlying sample.
#[derive(Debug, Clone)]
pub struct SensorSplit {
    pub name: String,
    pub train: LabeledFeatures,
    pub val: LabeledFeatures,
}

/// Draws the synthetic dataset. Deterministic given `spec.seed`.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<SensorSplit>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive(spec.seed, &[tag("synthetic")]));
    let total = spec.n_train + spec.n_val;
    let dim = spec.sensor_dim();

    // Fixed class means and per-sensor observation maps.
    let mut class_means = Matrix::zeros((spec.n_classes, spec.shared_dim));
    for v in class_means.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal) * CLASS_MEAN_SCALE;
    }
    let map_scale = 1.0 / (spec.shared_dim as f64).sqrt();
    let mut maps: Vec<Matrix> = Vec::with_capacity(spec.n_sensors);
    for m in 0..spec.n_sensors {
        if spec.tied_sensor_maps && m > 0 {
            maps.push(maps[0].clone());
            // Keep the rng stream aligned with the untied case.
            for _ in 0..spec.shared_dim * spec.shared_dim {
                let _: f64 = rng.sample(StandardNormal);
            }
            continue;
        }
        let mut a = Matrix::zeros((spec.shared_dim, spec.shared_dim));
        for v in a.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * map_scale;
        }
        maps.push(a);
    }

    let mut labels = Vec::with_capacity(total);
    let mut observations: Vec<Matrix> = (0..spec.n_sensors)
        .map(|_| Matrix::zeros((total, dim)))
        .collect();
    let mut latent = Array1::zeros(spec.shared_dim);
    for i in 0..total {
        let class = rng.gen_range(0..spec.n_classes);
        labels.push(class);
        for (j, z) in latent.iter_mut().enumerate() {
            *z = class_means[[class, j]] + rng.sample::<f64, _>(StandardNormal);
        }
        for (m, obs) in observations.iter_mut().enumerate() {
            let signal = maps[m].t().dot(&latent) * spec.sensor_informativeness[m];
            for j in 0..dim {
                let base = if j < spec.shared_dim {
                    signal[j]
                } else {
                    rng.sample(StandardNormal)
                };
                obs[[i, j]] = base + spec.noise_sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }

    let mut out = Vec::with_capacity(spec.n_sensors);
    for (m, obs) in observations.into_iter().enumerate() {
        let train_feats = obs.slice(ndarray::s![..spec.n_train, ..]).to_owned();
        let val_feats = obs.slice(ndarray::s![spec.n_train.., ..]).to_owned();
        out.push(SensorSplit {
            name: format!("s{m}"),
            train: LabeledFeatures::new(train_feats, labels[..spec.n_train].to_vec())?,
            val: LabeledFeatures::new(val_feats, labels[spec.n_train..].to_vec())?,
        });
    }
    Ok(out)
}

/// One dense layer: `y = x·Wᵀ + b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseLayer {
    /// out × in weights.
    pub weights: Matrix,
    pub bias: Array1<f64>,
}

/// Fully-connected network with ReLU hidden layers and a linear final layer.
/// The final layer doubles as the classification head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<DenseLayer>,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().unwrap().weights.nrows()
    }

    /// Activations after each hidden layer plus the final logits.
    fn forward_trace(&self, x: &FeatureMatrix) -> Vec<Matrix> {
        let mut acts = Vec::with_capacity(self.layers.len());
        let mut cur = x.clone();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut z = cur.dot(&layer.weights.t()) + &layer.bias;
            if idx + 1 < self.layers.len() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z.clone());
            cur = z;
        }
        acts
    }

    /// Class scores for raw inputs.
    pub fn forward_logits(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.ncols() != self.input_dim() {
            return Err(Error::dims(
                "MlpModel::forward_logits",
                format!("{} input columns", self.input_dim()),
                format!("{}", x.ncols()),
            ));
        }
        Ok(self.forward_trace(x).pop().expect("at least one layer"))
    }

    /// Mean cross-entropy on labeled raw inputs.
    pub fn cross_entropy_loss(&self, data: &LabeledFeatures) -> Result<f64> {
        let y = self.forward_logits(&data.features)?;
        let mut total = 0.0;
        for (row, &label) in y.axis_iter(Axis(0)).zip(data.labels.iter()) {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let logsum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            total += logsum - row[label];
        }
        Ok(total / data.len() as f64)
    }

    /// Backprop gradients of the mean cross-entropy, one (∂W, ∂b) per layer.
    pub fn loss_gradients(&self, data: &LabeledFeatures) -> Result<Vec<(Matrix, Array1<f64>)>> {
        let x = &data.features;
        if x.ncols() != self.input_dim() {
            return Err(Error::dims(
                "MlpModel::loss_gradients",
                format!("{} input columns", self.input_dim()),
                format!("{}", x.ncols()),
            ));
        }
        let acts = self.forward_trace(x);
        let logits = acts.last().expect("at least one layer");
        let (mut delta, _) = softmax_predict(logits)?;
        for (i, &label) in data.labels.iter().enumerate() {
            delta[[i, label]] -= 1.0;
        }
        delta /= data.len() as f64;

        let mut grads = vec![(Matrix::zeros((0, 0)), Array1::zeros(0)); self.layers.len()];
        for idx in (0..self.layers.len()).rev() {
            let input = if idx == 0 { x } else { &acts[idx - 1] };
            grads[idx] = (delta.t().dot(input), delta.sum_axis(Axis(0)));
            if idx > 0 {
                let mut back = delta.dot(&self.layers[idx].weights);
                // ReLU gate of the previous hidden activation.
                for (b, a) in back.iter_mut().zip(acts[idx - 1].iter()) {
                    if *a <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = back;
            }
        }
        Ok(grads)
    }
}

/// Trains an MLP with plain SGD on cross-entropy. `hidden` lists the hidden
/// layer widths; the output width is `n_classes`. Deterministic given
/// `hyper.seed`.
pub fn train_mlp(
    data: &LabeledFeatures,
    hidden: &[usize],
    n_classes: usize,
    hyper: &TrainHyper,
) -> Result<MlpModel> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("train_mlp: empty data".into()));
    }
    hyper.validate()?;
    if n_classes < 2 {
        return Err(Error::InvalidArgument("train_mlp: n_classes must be ≥ 2".into()));
    }
    if data.labels.iter().any(|&l| l >= n_classes) {
        return Err(Error::InvalidArgument(
            "train_mlp: label outside class range".into(),
        ));
    }
    if hidden.iter().any(|&h| h == 0) {
        return Err(Error::InvalidArgument(
            "train_mlp: hidden widths must be ≥ 1".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut sizes = vec![data.features.ncols()];
    sizes.extend_from_slice(hidden);
    sizes.push(n_classes);

    // He-style initialization for the ReLU stack.
    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for w in sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let scale = (2.0 / fan_in as f64).sqrt();
        let mut weights = Matrix::zeros((fan_out, fan_in));
        for v in weights.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * scale;
        }
        layers.push(DenseLayer {
            weights,
            bias: Array1::zeros(fan_out),
        });
    }
    let mut model = MlpModel { layers };
    if hyper.epochs == 0 {
        return Ok(model);
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    for _epoch in 0..hyper.epochs {
        shuffle(&mut order, &mut rng);
        for chunk in order.chunks(hyper.batch) {
            let batch = take_rows(data, chunk);
            let grads = model.loss_gradients(&batch)?;
            for (layer, (gw, gb)) in model.layers.iter_mut().zip(grads.into_iter()) {
                if hyper.weight_decay > 0.0 {
                    let wd = hyper.weight_decay;
                    layer.weights.zip_mut_with(&gw, |w, g| {
                        *w -= hyper.lr * (g + wd * *w);
                    });
                } else {
                    layer.weights.scaled_add(-hyper.lr, &gw);
                }
                layer.bias.scaled_add(-hyper.lr, &gb);
            }
        }
        let loss = model.cross_entropy_loss(data)?;
        if !loss.is_finite() {
            return Err(Error::Numerical(
                "train_mlp diverged: loss is not finite".into(),
            ));
        }
    }
    Ok(model)
}

/// Penultimate activations plus the final layer as a [`LinearHead`].
pub fn extract_features(
    model: &MlpModel,
    x_raw: &FeatureMatrix,
) -> Result<(FeatureMatrix, LinearHead)> {
    if x_raw.ncols() != model.input_dim() {
        return Err(Error::dims(
            "extract_features",
            format!("{} input columns", model.input_dim()),
            format!("{}", x_raw.ncols()),
        ));
    }
    let mut acts = model.forward_trace(x_raw);
    acts.pop(); // drop the logits
    let penultimate = acts
        .pop()
        .ok_or_else(|| Error::InvalidArgument("extract_features: model has no hidden layer".into()))?;
    let last = model.layers.last().expect("at least one layer");
    let head = LinearHead::new(last.weights.clone(), last.bias.clone())?;
    Ok((penultimate, head))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cca::fit_cca;
    use crate::heads::{evaluate, logits, Metric};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn quick_hyper(seed: u64) -> TrainHyper {
        TrainHyper {
            lr: 0.05,
            epochs: 15,
            batch: 128,
            seed,
            weight_decay: 0.0,
        }
    }

    fn small_spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n_train: 2000,
            n_val: 600,
            ..SyntheticSpec::with_seed(seed)
        }
    }

    #[test]
    fn generator_is_deterministic_and_aligned() {
        let spec = small_spec(7);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.len(), 2);
        for (sa, sb) in a.iter().zip(b.iter()) {
            assert_eq!(sa.train.features, sb.train.features);
            assert_eq!(sa.val.labels, sb.val.labels);
        }
        // Labels aligned across sensors.
        assert_eq!(a[0].train.labels, a[1].train.labels);
        assert_eq!(a[0].val.labels, a[1].val.labels);
    }

    #[test]
    fn zero_informativeness_gives_chance_accuracy() {
        let mut spec = small_spec(11);
        spec.sensor_informativeness = vec![1.0, 0.0];
        let sensors = generate(&spec).unwrap();
        let model = train_mlp(&sensors[1].train, &[32], spec.n_classes, &quick_hyper(3)).unwrap();
        let (val_feats, head) = extract_features(&model, &sensors[1].val.features).unwrap();
        let acc = evaluate(
            &head,
            &sensors[1].val.with_features(val_feats).unwrap(),
            Metric::Accuracy,
        )
        .unwrap();
        let chance = 1.0 / spec.n_classes as f64;
        assert!(
            (acc - chance).abs() < 0.05,
            "no-signal sensor should be near chance; got {acc}"
        );
    }

    #[test]
    fn tied_maps_give_high_first_correlation() {
        let mut spec = small_spec(13);
        spec.tied_sensor_maps = true;
        spec.noise_sigma = 0.1;
        spec.sensor_informativeness = vec![1.0, 1.0];
        let sensors = generate(&spec).unwrap();
        let basis = fit_cca(
            &sensors[0].train.features,
            &sensors[1].train.features,
            0.9999,
        )
        .unwrap();
        assert!(
            basis.rho[0] > 0.95,
            "tied sensor maps should correlate strongly; rho1 = {}",
            basis.rho[0]
        );
    }

    #[test]
    fn accuracy_ordered_by_informativeness() {
        let spec = small_spec(17);
        let sensors = generate(&spec).unwrap();
        let mut accs = Vec::new();
        for sensor in &sensors {
            let model = train_mlp(&sensor.train, &[32], spec.n_classes, &quick_hyper(5)).unwrap();
            let (val_feats, head) = extract_features(&model, &sensor.val.features).unwrap();
            let acc = evaluate(
                &head,
                &sensor.val.with_features(val_feats).unwrap(),
                Metric::Accuracy,
            )
            .unwrap();
            accs.push(acc);
        }
        assert!(
            accs[0] > accs[1],
            "informativeness 1.0 vs 0.7 should order accuracies; got {accs:?}"
        );
    }

    #[test]
    fn separable_task_reaches_high_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut feats = Matrix::zeros((1500, 4));
        let mut labels = Vec::new();
        for i in 0..1500 {
            let class = i % 2;
            let offset = if class == 0 { -2.5 } else { 2.5 };
            for j in 0..4 {
                feats[[i, j]] = offset + rng.sample::<f64, _>(StandardNormal) * 0.8;
            }
            labels.push(class);
        }
        let data = LabeledFeatures::new(feats, labels).unwrap();
        let hyper = TrainHyper {
            lr: 0.1,
            epochs: 25,
            batch: 64,
            seed: 1,
            weight_decay: 0.0,
        };
        let model = train_mlp(&data, &[32], 2, &hyper).unwrap();
        let (f, head) = extract_features(&model, &data.features).unwrap();
        let acc = evaluate(&head, &data.with_features(f).unwrap(), Metric::Accuracy).unwrap();
        assert!(acc >= 0.95, "validation accuracy {acc}");
    }

    #[test]
    fn zero_epochs_returns_initialization_bitwise() {
        let spec = small_spec(29);
        let sensors = generate(&spec).unwrap();
        let mut hyper = quick_hyper(9);
        hyper.epochs = 0;
        let a = train_mlp(&sensors[0].train, &[16], spec.n_classes, &hyper).unwrap();
        let b = train_mlp(&sensors[0].train, &[16], spec.n_classes, &hyper).unwrap();
        for (la, lb) in a.layers.iter().zip(b.layers.iter()) {
            assert_eq!(la.weights, lb.weights);
            assert_eq!(la.bias, lb.bias);
        }
    }

    #[test]
    fn degenerate_constant_input_stays_finite() {
        let feats = Matrix::from_elem((64, 5), 1.0);
        let labels: Vec<usize> = (0..64).map(|i| i % 2).collect();
        let data = LabeledFeatures::new(feats, labels).unwrap();
        let model = train_mlp(&data, &[8], 2, &quick_hyper(2)).unwrap();
        let loss = model.cross_entropy_loss(&data).unwrap();
        assert!(loss.is_finite());
    }

    #[test]
    fn extracted_head_reproduces_forward_pass() {
        let spec = small_spec(31);
        let sensors = generate(&spec).unwrap();
        let model = train_mlp(&sensors[0].train, &[24], spec.n_classes, &quick_hyper(4)).unwrap();
        let (feats, head) = extract_features(&model, &sensors[0].val.features).unwrap();
        assert_eq!(feats.nrows(), sensors[0].val.len());
        assert_eq!(feats.ncols(), 24);
        assert!(feats.iter().all(|&v| v >= 0.0), "ReLU features nonnegative");
        let via_head = logits(&head, &feats).unwrap();
        let direct = model.forward_logits(&sensors[0].val.features).unwrap();
        for (a, b) in via_head.iter().zip(direct.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn same_seed_training_is_bitwise_identical() {
        let spec = small_spec(37);
        let sensors = generate(&spec).unwrap();
        let a = train_mlp(&sensors[0].train, &[16], spec.n_classes, &quick_hyper(6)).unwrap();
        let b = train_mlp(&sensors[0].train, &[16], spec.n_classes, &quick_hyper(6)).unwrap();
        for (la, lb) in a.layers.iter().zip(b.layers.iter()) {
            assert_eq!(la.weights, lb.weights);
            assert_eq!(la.bias, lb.bias);
        }
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut feats = Matrix::zeros((16, 5));
        for v in feats.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let labels: Vec<usize> = (0..16).map(|_| rng.gen_range(0..3)).collect();
        let data = LabeledFeatures::new(feats, labels).unwrap();
        let mut hyper = quick_hyper(8);
        hyper.epochs = 2;
        let model = train_mlp(&data, &[6, 4], 3, &hyper).unwrap();
        let grads = model.loss_gradients(&data).unwrap();

        let h = 1e-5;
        for _ in 0..10 {
            let layer = rng.gen_range(0..model.layers.len());
            let r = rng.gen_range(0..model.layers[layer].weights.nrows());
            let c = rng.gen_range(0..model.layers[layer].weights.ncols());
            let mut plus = model.clone();
            let mut minus = model.clone();
            plus.layers[layer].weights[[r, c]] += h;
            minus.layers[layer].weights[[r, c]] -= h;
            let num = (plus.cross_entropy_loss(&data).unwrap()
                - minus.cross_entropy_loss(&data).unwrap())
                / (2.0 * h);
            let ana = grads[layer].0[[r, c]];
            let rel = (num - ana).abs() / num.abs().max(ana.abs()).max(1e-8);
            assert!(rel < 1e-4, "layer {layer} dW[{r},{c}] rel err {rel}");
        }
    }

    #[test]
    fn different_inits_are_linearly_related_through_cca() {
        let spec = small_spec(43);
        let sensors = generate(&spec).unwrap();
        let m1 = train_mlp(&sensors[0].train, &[32], spec.n_classes, &quick_hyper(100)).unwrap();
        let m2 = train_mlp(&sensors[0].train, &[32], spec.n_classes, &quick_hyper(200)).unwrap();
        let (f1, _) = extract_features(&m1, &sensors[0].train.features).unwrap();
        let (f2, _) = extract_features(&m2, &sensors[0].train.features).unwrap();
        let basis = fit_cca(&f1, &f2, 0.9999).unwrap();
        assert!(
            basis.rho[0] > 0.9,
            "two initializations should share a strong component; rho1 = {}",
            basis.rho[0]
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::with_seed(1);
        spec.n_classes = 1;
        assert!(generate(&spec).is_err());
        let mut spec = SyntheticSpec::with_seed(1);
        spec.noise_sigma = 0.0;
        assert!(generate(&spec).is_err());
        let mut spec = SyntheticSpec::with_seed(1);
        spec.sensor_informativeness = vec![1.0];
        assert!(generate(&spec).is_err());
    }
}
