//! The learnability probe: a small feed-forward softmax classifier trained
//! from scratch, used to verify that a scaling method preserves the simple
//! within-slice price relationships a forecasting model would need.
//!
//! One tanh hidden layer over the flattened slice, softmax output, Adam
//! updates, optional inverted dropout on the hidden layer. The bare model
//! defaults to bias-free layers; the learnability suite turns biases on
//! (see [`SuiteOptions::use_bias`]). Everything is a pure function of
//! (inputs, seed): two runs with the same configuration produce identical
//! reports.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeling::{label_probe_conditions, ProbeCondition};
use crate::scaling::{scale_slices, ScaleMethod, ScalerConfig};
use crate::splitting::{split_then_shuffle, Embargo, SplitPlan};
use crate::windowing::{flatten, make_slices, Channel, SliceSpec};

/// Feed-forward softmax classifier on flattened slices.
#[derive(Debug, Clone)]
pub struct ProbeModel {
    input_dim: usize,
    hidden_units: usize,
    class_count: usize,
    use_bias: bool,
    /// input_dim x hidden, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// hidden x classes, row-major.
    w2: Vec<f64>,
    b2: Vec<f64>,
    trained: bool,
}

impl ProbeModel {
    /// Symmetric uniform initialization in +-sqrt(6 / (fan_in + fan_out)).
    pub fn new(
        input_dim: usize,
        hidden_units: usize,
        class_count: usize,
        use_bias: bool,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_units == 0 || class_count < 2 {
            return Err(Error::Probe(format!(
                "bad model shape: input {input_dim}, hidden {hidden_units}, classes {class_count}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |fan_in: usize, fan_out: usize, len: usize| -> Vec<f64> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..len).map(|_| rng.gen_range(-limit..limit)).collect()
        };
        Ok(Self {
            w1: init(input_dim, hidden_units, input_dim * hidden_units),
            b1: vec![0.0; hidden_units],
            w2: init(hidden_units, class_count, hidden_units * class_count),
            b2: vec![0.0; class_count],
            input_dim,
            hidden_units,
            class_count,
            use_bias,
            trained: false,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Total trainable parameter count.
    pub fn parameter_count(&self) -> usize {
        let biases = if self.use_bias { self.hidden_units + self.class_count } else { 0 };
        self.w1.len() + self.w2.len() + biases
    }

    fn hidden(&self, x: &[f64], out: &mut [f64]) {
        for h in 0..self.hidden_units {
            let mut z = if self.use_bias { self.b1[h] } else { 0.0 };
            for (i, &xi) in x.iter().enumerate() {
                z += xi * self.w1[i * self.hidden_units + h];
            }
            out[h] = z.tanh();
        }
    }

    fn logits_from_hidden(&self, hidden: &[f64], out: &mut [f64]) {
        for c in 0..self.class_count {
            let mut z = if self.use_bias { self.b2[c] } else { 0.0 };
            for (h, &a) in hidden.iter().enumerate() {
                z += a * self.w2[h * self.class_count + c];
            }
            out[c] = z;
        }
    }

    /// Class probabilities for one flattened slice.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::Probe(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let mut hidden = vec![0.0; self.hidden_units];
        self.hidden(x, &mut hidden);
        let mut logits = vec![0.0; self.class_count];
        self.logits_from_hidden(&hidden, &mut logits);
        softmax_in_place(&mut logits);
        Ok(logits)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let p = self.predict_proba(x)?;
        Ok(argmax(&p))
    }
}

fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Training hyperparameters. Defaults: 100 epochs, batches of 64, Adam at
/// 1e-3, no dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub dropout_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 100, batch_size: 64, learning_rate: 1e-3, seed: 0, dropout_rate: 0.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self, train_size: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Probe("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > train_size {
            return Err(Error::Probe(format!(
                "batch size {} must be in 1..={train_size}",
                self.batch_size
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Probe(format!("dropout {} outside [0, 1)", self.dropout_rate)));
        }
        Ok(())
    }
}

/// Everything the training run measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// Per-class precision on the validation set; 0 when a class is never
    /// predicted.
    pub precision: Vec<f64>,
    pub accuracy: f64,
    /// Rows are actual classes, columns predicted.
    pub confusion: Vec<Vec<usize>>,
    pub val_samples: usize,
    pub class_count: usize,
}

struct Gradients {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl Gradients {
    fn zeros(model: &ProbeModel) -> Self {
        Self {
            w1: vec![0.0; model.w1.len()],
            b1: vec![0.0; model.b1.len()],
            w2: vec![0.0; model.w2.len()],
            b2: vec![0.0; model.b2.len()],
        }
    }

    fn clear(&mut self) {
        self.w1.iter_mut().for_each(|v| *v = 0.0);
        self.b1.iter_mut().for_each(|v| *v = 0.0);
        self.w2.iter_mut().for_each(|v| *v = 0.0);
        self.b2.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Mean cross-entropy over the batch and its gradients. `dropout_masks`
/// (one scaled mask per sample, or empty for none) makes training and
/// gradient checking share the same code path.
fn batch_loss_and_gradients(
    model: &ProbeModel,
    xs: &[&[f64]],
    ys: &[usize],
    dropout_masks: Option<&[Vec<f64>]>,
    grads: &mut Gradients,
) -> f64 {
    let b = xs.len() as f64;
    let mut hidden = vec![0.0; model.hidden_units];
    let mut logits = vec![0.0; model.class_count];
    let mut total_loss = 0.0;

    for (s, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        model.hidden(x, &mut hidden);
        let mut dropped = hidden.clone();
        if let Some(masks) = dropout_masks {
            for (a, m) in dropped.iter_mut().zip(&masks[s]) {
                *a *= m;
            }
        }
        model.logits_from_hidden(&dropped, &mut logits);
        softmax_in_place(&mut logits);
        total_loss += -logits[y].max(1e-300).ln();

        // dL/dlogits for softmax cross-entropy, averaged over the batch.
        for c in 0..model.class_count {
            let dz2 = (logits[c] - if c == y { 1.0 } else { 0.0 }) / b;
            if model.use_bias {
                grads.b2[c] += dz2;
            }
            for h in 0..model.hidden_units {
                grads.w2[h * model.class_count + c] += dropped[h] * dz2;
            }
        }
        for h in 0..model.hidden_units {
            let mut da = 0.0;
            for c in 0..model.class_count {
                let dz2 = (logits[c] - if c == y { 1.0 } else { 0.0 }) / b;
                da += model.w2[h * model.class_count + c] * dz2;
            }
            if let Some(masks) = dropout_masks {
                da *= masks[s][h];
            }
            let dz1 = da * (1.0 - hidden[h] * hidden[h]);
            if model.use_bias {
                grads.b1[h] += dz1;
            }
            for (i, &xi) in x.iter().enumerate() {
                grads.w1[i * model.hidden_units + h] += xi * dz1;
            }
        }
    }
    total_loss / b
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grads[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grads[i] * grads[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= lr * mhat / (vhat.sqrt() + EPS);
        }
    }
}

/// Mini-batch training over the split's shuffled train indices, recording
/// per-epoch train and validation loss. Deterministic for a fixed seed.
pub fn train(
    model: &mut ProbeModel,
    data: &[Vec<f64>],
    labels: &[usize],
    split: &SplitPlan,
    config: &TrainConfig,
) -> Result<ProbeReport> {
    if data.len() != labels.len() {
        return Err(Error::Probe(format!(
            "{} samples but {} labels",
            data.len(),
            labels.len()
        )));
    }
    if data.iter().any(|row| row.len() != model.input_dim) {
        return Err(Error::Probe("sample width differs from model input".into()));
    }
    let train_idx = &split.train_order;
    let val_idx = &split.val_indices;
    if train_idx.iter().chain(val_idx).any(|&i| i >= data.len()) {
        return Err(Error::Probe("split refers to samples outside the dataset".into()));
    }
    if val_idx.is_empty() {
        return Err(Error::Probe("split has no validation samples".into()));
    }
    config.validate(train_idx.len())?;
    for c in 0..model.class_count {
        if !train_idx.iter().any(|&i| labels[i] == c) {
            return Err(Error::Probe(format!("class {c} absent from training set")));
        }
    }
    if labels.iter().any(|&y| y >= model.class_count) {
        return Err(Error::Probe("label outside model class range".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order = train_idx.clone();
    let mut grads = Gradients::zeros(model);
    let mut adam_w1 = Adam::new(model.w1.len());
    let mut adam_b1 = Adam::new(model.b1.len());
    let mut adam_w2 = Adam::new(model.w2.len());
    let mut adam_b2 = Adam::new(model.b2.len());
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut val_loss = Vec::with_capacity(config.epochs);
    let dropout = config.dropout_rate;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| data[i].as_slice()).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let masks: Option<Vec<Vec<f64>>> = (dropout > 0.0).then(|| {
                let scale = 1.0 / (1.0 - dropout);
                (0..xs.len())
                    .map(|_| {
                        (0..model.hidden_units)
                            .map(|_| if rng.gen::<f64>() < dropout { 0.0 } else { scale })
                            .collect()
                    })
                    .collect()
            });
            grads.clear();
            let loss = batch_loss_and_gradients(model, &xs, &ys, masks.as_deref(), &mut grads);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            epoch_loss += loss * xs.len() as f64;
            seen += xs.len();
            adam_w1.step(&mut model.w1, &grads.w1, config.learning_rate);
            adam_w2.step(&mut model.w2, &grads.w2, config.learning_rate);
            if model.use_bias {
                adam_b1.step(&mut model.b1, &grads.b1, config.learning_rate);
                adam_b2.step(&mut model.b2, &grads.b2, config.learning_rate);
            }
        }
        train_loss.push(epoch_loss / seen as f64);

        let mut vloss = 0.0;
        for &i in val_idx {
            let p = model.predict_proba(&data[i])?;
            vloss += -p[labels[i]].max(1e-300).ln();
        }
        val_loss.push(vloss / val_idx.len() as f64);
    }
    model.trained = true;

    let predictions: Vec<usize> = val_idx
        .iter()
        .map(|&i| model.predict(&data[i]))
        .collect::<Result<_>>()?;
    let actuals: Vec<usize> = val_idx.iter().map(|&i| labels[i]).collect();
    let confusion = confusion_matrix(&predictions, &actuals, model.class_count)?;
    let (precision, accuracy) = precision_and_accuracy(&confusion);

    Ok(ProbeReport {
        train_loss,
        val_loss,
        precision,
        accuracy,
        confusion,
        val_samples: val_idx.len(),
        class_count: model.class_count,
    })
}

/// Entry `(a, p)` counts samples with actual class `a` predicted as `p`.
pub fn confusion_matrix(
    predictions: &[usize],
    actuals: &[usize],
    class_count: usize,
) -> Result<Vec<Vec<usize>>> {
    if predictions.len() != actuals.len() {
        return Err(Error::Probe(format!(
            "{} predictions vs {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    let mut matrix = vec![vec![0usize; class_count]; class_count];
    for (&p, &a) in predictions.iter().zip(actuals) {
        if p >= class_count || a >= class_count {
            return Err(Error::Probe(format!("class {} out of range", p.max(a))));
        }
        matrix[a][p] += 1;
    }
    Ok(matrix)
}

/// Per-class precision (diagonal over predicted-column total) and accuracy.
pub fn precision_and_accuracy(confusion: &[Vec<usize>]) -> (Vec<f64>, f64) {
    let classes = confusion.len();
    let total: usize = confusion.iter().map(|r| r.iter().sum::<usize>()).sum();
    let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();
    let precision = (0..classes)
        .map(|c| {
            let predicted: usize = (0..classes).map(|a| confusion[a][c]).sum();
            if predicted == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / predicted as f64
            }
        })
        .collect();
    let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
    (precision, accuracy)
}

/// Compares analytic gradients against central finite differences
/// (step 1e-5) on every weight, returning the maximum relative error.
/// Intended for reduced models (a few hundred parameters at most).
pub fn gradient_check(model: &ProbeModel, xs: &[Vec<f64>], ys: &[usize]) -> Result<f64> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Probe("gradient check needs a non-empty batch".into()));
    }
    let x_refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
    let mut grads = Gradients::zeros(model);
    batch_loss_and_gradients(model, &x_refs, ys, None, &mut grads);

    let mut work = model.clone();
    let loss_at = |m: &ProbeModel| -> f64 {
        let mut g = Gradients::zeros(m);
        batch_loss_and_gradients(m, &x_refs, ys, None, &mut g)
    };

    const STEP: f64 = 1e-5;
    let mut max_err = 0.0f64;
    // (accessor to the parameter vector, analytic gradient, enabled)
    let specs: [(fn(&mut ProbeModel) -> &mut Vec<f64>, &Vec<f64>, bool); 4] = [
        (|m| &mut m.w1, &grads.w1, true),
        (|m| &mut m.b1, &grads.b1, model.use_bias),
        (|m| &mut m.w2, &grads.w2, true),
        (|m| &mut m.b2, &grads.b2, model.use_bias),
    ];
    for (access, analytic, enabled) in specs {
        if !enabled {
            continue;
        }
        for idx in 0..analytic.len() {
            let original = access(&mut work)[idx];
            access(&mut work)[idx] = original + STEP;
            let up = loss_at(&work);
            access(&mut work)[idx] = original - STEP;
            let down = loss_at(&work);
            access(&mut work)[idx] = original;
            let numeric = (up - down) / (2.0 * STEP);
            let denom = analytic[idx].abs().max(numeric.abs()).max(1e-8);
            max_err = max_err.max((analytic[idx] - numeric).abs() / denom);
        }
    }
    Ok(max_err)
}

/// Configuration for the learnability suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub lookback: usize,
    pub hidden_units: usize,
    pub train: TrainConfig,
    /// Train fraction; the remainder is validation.
    pub train_fraction: f64,
    /// The suite enables biases: standardized slices are exactly zero-mean,
    /// so a bias-free net has no constant direction to build the nonzero
    /// decision threshold the highest-close condition needs (its soft-AND
    /// over nine comparisons). The two threshold-at-zero conditions learn
    /// fine either way.
    pub use_bias: bool,
    pub conditions: Vec<ProbeCondition>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            lookback: 20,
            hidden_units: 32,
            train: TrainConfig::default(),
            train_fraction: 0.8,
            use_bias: true,
            conditions: ProbeCondition::ALL.to_vec(),
        }
    }
}

/// Trains one probe per condition on close-only slices and reports how well
/// each within-slice relationship was learned. A scaling method is usable
/// when all three conditions train to high validation accuracy; `None`
/// skips scaling so the raw-price control can be run with the same harness.
pub fn run_learnability_suite(
    closes: &[f64],
    method: Option<ScaleMethod>,
    options: &SuiteOptions,
) -> Result<Vec<(ProbeCondition, ProbeReport)>> {
    let spec = SliceSpec {
        lookback: options.lookback,
        stride: 1,
        channels: vec!["close".into()],
        label_horizon: 0,
    };
    let channels = vec![Channel::new("close", closes.to_vec())];
    let tensor = make_slices(&channels, &spec)?;
    let scaled = match method {
        Some(m) => {
            let config = match m {
                ScaleMethod::MinMax => ScalerConfig::minmax_unit(&spec.channels),
                ScaleMethod::Standardize => ScalerConfig::standardize(&spec.channels),
            };
            scale_slices(&tensor, &config)?
        }
        None => tensor.clone(),
    };
    let data = flatten(&scaled);
    let val_fraction = 1.0 - options.train_fraction;
    let split = split_then_shuffle(
        scaled.slice_count(),
        (options.train_fraction, val_fraction, 0.0),
        options.train.seed,
        &spec,
        Embargo::Auto,
    )?;

    let mut reports = Vec::new();
    for &condition in &options.conditions {
        let labels = label_probe_conditions(closes, &tensor.end_indices, condition)?;
        let classes = labels.values.as_classes().expect("probe labels are classes");
        let mut model = ProbeModel::new(
            options.lookback,
            options.hidden_units,
            2,
            options.use_bias,
            options.train.seed,
        )?;
        let report = train(&mut model, &data, classes, &split, &options.train)?;
        reports.push((condition, report));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::SplitMethod;

    fn blobs(seed: u64, per_class: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        // Two well-separated Gaussian-ish blobs in 4 dimensions.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2usize {
            let center = if class == 0 { -2.0 } else { 2.0 };
            for _ in 0..per_class {
                data.push((0..4).map(|_| center + rng.gen_range(-0.8..0.8)).collect());
                labels.push(class);
            }
        }
        // Interleave so a contiguous split keeps both classes on both sides.
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut rng);
        let data2: Vec<Vec<f64>> = idx.iter().map(|&i| data[i].clone()).collect();
        let labels2: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        (data2, labels2)
    }

    fn plain_split(total: usize, seed: u64) -> SplitPlan {
        let spec = SliceSpec {
            lookback: 2,
            stride: 1,
            channels: vec!["x".into()],
            label_horizon: 0,
        };
        split_then_shuffle(total, (0.8, 0.2, 0.0), seed, &spec, Embargo::Auto).unwrap()
    }

    #[test]
    fn learns_separable_blobs() {
        let (data, labels) = blobs(3, 100);
        let split = plain_split(data.len(), 3);
        let mut model = ProbeModel::new(4, 8, 2, false, 3).unwrap();
        let config = TrainConfig { epochs: 100, batch_size: 16, ..Default::default() };
        let report = train(&mut model, &data, &labels, &split, &config).unwrap();
        assert!(report.accuracy >= 0.99, "accuracy {}", report.accuracy);
        assert!(model.is_trained());
    }

    #[test]
    fn training_loss_trends_down_on_separable_data() {
        let (data, labels) = blobs(5, 80);
        let split = plain_split(data.len(), 5);
        let mut model = ProbeModel::new(4, 8, 2, false, 5).unwrap();
        let config = TrainConfig { epochs: 10, batch_size: 16, ..Default::default() };
        let report = train(&mut model, &data, &labels, &split, &config).unwrap();
        assert!(
            report.train_loss.last().unwrap() < report.train_loss.first().unwrap(),
            "losses {:?}",
            report.train_loss
        );
    }

    #[test]
    fn coin_flip_labels_score_near_half() {
        let mut accs = Vec::new();
        for seed in 0..3u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let data: Vec<Vec<f64>> =
                (0..400).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let labels: Vec<usize> = (0..400).map(|_| rng.gen_range(0..2)).collect();
            let split = plain_split(400, seed);
            let mut model = ProbeModel::new(6, 8, 2, false, seed).unwrap();
            let config = TrainConfig { epochs: 30, batch_size: 32, ..Default::default() };
            let report = train(&mut model, &data, &labels, &split, &config).unwrap();
            accs.push(report.accuracy);
        }
        let mean: f64 = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((mean - 0.5).abs() < 0.1, "mean accuracy {mean} ({accs:?})");
    }

    #[test]
    fn deterministic_given_seed() {
        let (data, labels) = blobs(7, 60);
        let split = plain_split(data.len(), 7);
        let config = TrainConfig { epochs: 5, batch_size: 16, ..Default::default() };
        let mut m1 = ProbeModel::new(4, 8, 2, false, 7).unwrap();
        let r1 = train(&mut m1, &data, &labels, &split, &config).unwrap();
        let mut m2 = ProbeModel::new(4, 8, 2, false, 7).unwrap();
        let r2 = train(&mut m2, &data, &labels, &split, &config).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m1.w1, m2.w1);
    }

    #[test]
    fn softmax_rows_sum_to_one_and_loss_nonnegative() {
        let model = ProbeModel::new(5, 7, 3, false, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let p = model.predict_proba(&x).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!(p.iter().all(|&v| v >= 0.0));
            assert!(-p[0].max(1e-300).ln() >= 0.0);
        }
    }

    #[test]
    fn missing_class_in_training_set_rejected() {
        let data: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels = vec![0usize; 20];
        let split = plain_split(20, 1);
        let mut model = ProbeModel::new(1, 4, 2, false, 1).unwrap();
        let err = train(&mut model, &data, &labels, &split, &TrainConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn gradient_check_on_fresh_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let model = ProbeModel::new(8, 6, 2, false, 13).unwrap();
        assert!(model.parameter_count() <= 200);
        let xs: Vec<Vec<f64>> =
            (0..5).map(|_| (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let ys = vec![0, 1, 0, 1, 1];
        let err = gradient_check(&model, &xs, &ys).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn gradient_check_single_sample() {
        let model = ProbeModel::new(4, 4, 2, true, 17).unwrap();
        let xs = vec![vec![0.5, -1.0, 2.0, 0.1]];
        let ys = vec![1];
        let err = gradient_check(&model, &xs, &ys).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn zero_input_gives_zero_input_gradients_without_bias() {
        let model = ProbeModel::new(6, 5, 2, false, 19).unwrap();
        let xs = vec![vec![0.0; 6]; 3];
        let ys = vec![0, 1, 0];
        let x_refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let mut grads = Gradients::zeros(&model);
        batch_loss_and_gradients(&model, &x_refs, &ys, None, &mut grads);
        assert!(grads.w1.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn confusion_matrix_examples() {
        let perfect = confusion_matrix(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(perfect, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);

        // Degenerate predictor: everything lands in the first column and its
        // precision equals the majority share.
        let preds = vec![0usize; 100];
        let mut actuals = vec![0usize; 60];
        actuals.extend(vec![1usize; 40]);
        let m = confusion_matrix(&preds, &actuals, 2).unwrap();
        assert_eq!(m, vec![vec![60, 0], vec![40, 0]]);
        let (precision, accuracy) = precision_and_accuracy(&m);
        assert!((precision[0] - 0.6).abs() < 1e-12);
        assert_eq!(precision[1], 0.0);
        assert!((accuracy - 0.6).abs() < 1e-12);
    }

    #[test]
    fn confusion_matrix_matches_hand_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let preds: Vec<usize> = (0..200).map(|_| rng.gen_range(0..3)).collect();
        let actuals: Vec<usize> = (0..200).map(|_| rng.gen_range(0..3)).collect();
        let m = confusion_matrix(&preds, &actuals, 3).unwrap();
        for a in 0..3 {
            for p in 0..3 {
                let count =
                    preds.iter().zip(&actuals).filter(|&(&pp, &aa)| pp == p && aa == a).count();
                assert_eq!(m[a][p], count);
            }
        }
        let total: usize = m.iter().flatten().sum();
        assert_eq!(total, 200);
    }

    #[test]
    fn confusion_matrix_length_mismatch() {
        assert!(confusion_matrix(&[0, 1], &[0], 2).is_err());
    }

    #[test]
    fn suite_runs_on_short_series() {
        // Smoke test at tiny scale; thresholds live in the acceptance suite.
        let closes: Vec<f64> = (0..260)
            .map(|i| 100.0 + (i as f64 * 0.7).sin() * 5.0 + i as f64 * 0.01)
            .collect();
        let options = SuiteOptions {
            train: TrainConfig { epochs: 3, batch_size: 16, ..Default::default() },
            hidden_units: 8,
            ..Default::default()
        };
        let reports =
            run_learnability_suite(&closes, Some(ScaleMethod::Standardize), &options).unwrap();
        assert_eq!(reports.len(), 3);
        for (_, report) in &reports {
            assert_eq!(report.train_loss.len(), 3);
            assert_eq!(report.confusion.len(), 2);
            let total: usize = report.confusion.iter().flatten().sum();
            assert_eq!(total, report.val_samples);
        }
    }

    #[test]
    fn split_method_is_recorded() {
        let plan = plain_split(50, 2);
        assert_eq!(plan.method, SplitMethod::SplitThenShuffle);
    }
}
