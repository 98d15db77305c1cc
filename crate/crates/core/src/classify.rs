//! Single-hidden-layer feedforward classifier (tanh hidden units, logistic
//! output) trained by full-batch gradient descent on binary cross-entropy.
//!
//! Inputs are z-scored with statistics fitted on the training rows only;
//! constant columns are dropped and the drop is recorded in the model.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureRow, FeatureVector, FEATURE_NAMES};
use crate::ingest::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub split_ratio: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 10,
            learning_rate: 0.05,
            epochs: 2000,
            seed: 42,
            split_ratio: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 {
            return Err(Error::invalid("hidden_dim must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be positive"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::invalid(format!(
                "split ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        Ok(())
    }
}

/// Labeled rows of arbitrary width, the classifier's working format.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatures {
    pub columns: Vec<String>,
    pub ids: Vec<String>,
    pub labels: Vec<ClassLabel>,
    pub rows: Vec<Vec<f64>>,
}

impl LabeledFeatures {
    pub fn new(
        columns: Vec<String>,
        ids: Vec<String>,
        labels: Vec<ClassLabel>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if ids.len() != rows.len() || labels.len() != rows.len() {
            return Err(Error::invalid("ids, labels and rows differ in length"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::invalid(format!(
                "row of width {} in a {}-column table",
                r.len(),
                columns.len()
            )));
        }
        Ok(Self {
            columns,
            ids,
            labels,
            rows,
        })
    }

    /// Join matrices side by side. All must list the same ids in the same order.
    pub fn concat(mats: &[FeatureMatrix]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::Empty("no feature matrices to join".into()))?;
        let mut out = Self::from(first);
        for m in &mats[1..] {
            if m.rows.len() != out.rows.len()
                || m.rows.iter().zip(&out.ids).any(|(r, id)| &r.source_id != id)
            {
                return Err(Error::invalid("feature matrices list different segments"));
            }
            out.columns
                .extend(FEATURE_NAMES.iter().map(|c| format!("{}_{c}", m.band)));
            for (row, r) in out.rows.iter_mut().zip(&m.rows) {
                row.extend_from_slice(&r.features.to_array());
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn targets(&self) -> Vec<f64> {
        self.labels.iter().map(|l| l.target()).collect()
    }
}

impl From<&FeatureMatrix> for LabeledFeatures {
    fn from(m: &FeatureMatrix) -> Self {
        Self {
            columns: FEATURE_NAMES.iter().map(|c| format!("{}_{c}", m.band)).collect(),
            ids: m.rows.iter().map(|r| r.source_id.clone()).collect(),
            labels: m.rows.iter().map(|r| r.label).collect(),
            rows: m.rows.iter().map(|r| r.features.to_array().to_vec()).collect(),
        }
    }
}

/// Stratified shuffle split of row indices. Each class contributes
/// `round(ratio · n_class)` rows to the training side; both sides must keep
/// at least one row of every class present.
pub fn stratified_split_indices(
    labels: &[ClassLabel],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in ClassLabel::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            return Err(Error::invalid(format!("class {class} has no rows to split")));
        }
        idx.shuffle(&mut rng);
        let n_train = (ratio * idx.len() as f64).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::invalid(format!(
                "ratio {ratio} leaves class {class} ({} rows) absent from one side of the split",
                idx.len()
            )));
        }
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_dataset(m: &FeatureMatrix, ratio: f64, seed: u64) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let labels: Vec<ClassLabel> = m.rows.iter().map(|r| r.label).collect();
    let (train, test) = stratified_split_indices(&labels, ratio, seed)?;
    let pick = |idx: &[usize]| -> Vec<FeatureRow> { idx.iter().map(|&i| m.rows[i].clone()).collect() };
    Ok((
        FeatureMatrix::new(m.band, pick(&train)),
        FeatureMatrix::new(m.band, pick(&test)),
    ))
}

/// Per-column z-score statistics. Columns listed in `dropped` had zero
/// variance on the training rows and are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    /// Fit on `rows` using the population standard deviation, so the
    /// normalized training columns have unit variance.
    pub fn fit(rows: &[Vec<f64>], width: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("cannot fit normalization on zero rows".into()));
        }
        let n = rows.len() as f64;
        let mut out = Self {
            kept: Vec::new(),
            dropped: Vec::new(),
            mean: Vec::new(),
            std: Vec::new(),
        };
        for c in 0..width {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            if std > 1e-12 * mean.abs().max(1.0) {
                out.kept.push(c);
                out.mean.push(mean);
                out.std.push(std);
            } else {
                out.dropped.push(c);
            }
        }
        if out.kept.is_empty() {
            return Err(Error::invalid("every feature column is constant on the training set"));
        }
        Ok(out)
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&c, (m, s))| (row[c] - m) / s)
            .collect()
    }
}

/// Weights of a `d → h → 1` tanh/logistic network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `hidden_dim × input_dim`, row-major.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl Network {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            hidden_weights: vec![0.0; input_dim * hidden_dim],
            hidden_bias: vec![0.0; hidden_dim],
            output_weights: vec![0.0; hidden_dim],
            output_bias: 0.0,
        }
    }

    /// Every weight and bias drawn uniformly from `[-0.5, 0.5]`.
    pub fn random(input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect() };
        let hidden_weights = draw(input_dim * hidden_dim);
        let hidden_bias = draw(hidden_dim);
        let output_weights = draw(hidden_dim);
        let output_bias = draw(1)[0];
        Self {
            input_dim,
            hidden_dim,
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
        }
    }

    pub fn param_count(&self) -> usize {
        self.hidden_weights.len() + self.hidden_bias.len() + self.output_weights.len() + 1
    }

    /// Flattened parameters: hidden weights, hidden bias, output weights, output bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.hidden_weights);
        p.extend_from_slice(&self.hidden_bias);
        p.extend_from_slice(&self.output_weights);
        p.push(self.output_bias);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count(), "parameter vector length");
        let (w1, rest) = p.split_at(self.hidden_weights.len());
        let (b1, rest) = rest.split_at(self.hidden_dim);
        let (w2, b2) = rest.split_at(self.hidden_dim);
        self.hidden_weights.copy_from_slice(w1);
        self.hidden_bias.copy_from_slice(b1);
        self.output_weights.copy_from_slice(w2);
        self.output_bias = b2[0];
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden_dim)
            .map(|j| {
                let row = &self.hidden_weights[j * self.input_dim..(j + 1) * self.input_dim];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.hidden_bias[j];
                z.tanh()
            })
            .collect()
    }

    fn output_logit(&self, hidden: &[f64]) -> f64 {
        self.output_weights
            .iter()
            .zip(hidden)
            .map(|(w, a)| w * a)
            .sum::<f64>()
            + self.output_bias
    }

    /// Probability of the positive class for an already-normalized input.
    pub fn forward(&self, x: &[f64]) -> f64 {
        logistic(self.output_logit(&self.hidden(x)))
    }

    /// Mean binary cross-entropy over the rows.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| {
                let z = self.output_logit(&self.hidden(x));
                softplus(z) - y * z
            })
            .sum::<f64>()
            / xs.len() as f64
    }

    /// Mean cross-entropy and its gradient, laid out like [`Network::params`].
    pub fn loss_and_gradient(&self, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>) {
        let (d, h) = (self.input_dim, self.hidden_dim);
        let mut g_w1 = vec![0.0; d * h];
        let mut g_b1 = vec![0.0; h];
        let mut g_w2 = vec![0.0; h];
        let mut g_b2 = 0.0;
        let mut loss = 0.0;

        for (x, &y) in xs.iter().zip(ys) {
            let a = self.hidden(x);
            let z = self.output_logit(&a);
            loss += softplus(z) - y * z;
            let dz = logistic(z) - y;
            g_b2 += dz;
            for j in 0..h {
                g_w2[j] += dz * a[j];
                let dh = dz * self.output_weights[j] * (1.0 - a[j] * a[j]);
                g_b1[j] += dh;
                for (gw, xi) in g_w1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *gw += dh * xi;
                }
            }
        }

        let inv = 1.0 / xs.len() as f64;
        let mut grad = Vec::with_capacity(self.param_count());
        grad.extend(g_w1.iter().map(|g| g * inv));
        grad.extend(g_b1.iter().map(|g| g * inv));
        grad.extend(g_w2.iter().map(|g| g * inv));
        grad.push(g_b2 * inv);
        (loss * inv, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activations {
    pub hidden: String,
    pub output: String,
}

/// Trained classifier with its input normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Raw feature width, before constant columns are dropped.
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub feature_names: Vec<String>,
    pub activation: Activations,
    pub normalization: Normalization,
    pub network: Network,
    pub config: TrainConfig,
    pub final_loss: f64,
}

impl MlpModel {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    fn check(&self) -> Result<()> {
        let n = &self.normalization;
        let net = &self.network;
        let ok = n.kept.len() == n.mean.len()
            && n.kept.len() == n.std.len()
            && n.kept.len() + n.dropped.len() == self.input_dim
            && n.kept.iter().chain(&n.dropped).all(|&c| c < self.input_dim)
            && n.std.iter().all(|&s| s > 0.0)
            && net.input_dim == n.kept.len()
            && net.hidden_dim == self.hidden_dim
            && net.hidden_weights.len() == net.input_dim * net.hidden_dim
            && net.hidden_bias.len() == net.hidden_dim
            && net.output_weights.len() == net.hidden_dim;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("model weight or normalization shapes are inconsistent"))
        }
    }

    /// Probability of the Epileptic class for a raw feature row, kept
    /// strictly inside `(0, 1)`.
    pub fn probability(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "model expects {} features, got {}",
                self.input_dim,
                raw.len()
            )));
        }
        if let Some(v) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature value {v}")));
        }
        let p = self.network.forward(&self.normalization.apply(raw));
        Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    pub fn predict_row(&self, raw: &[f64]) -> Result<(ClassLabel, f64)> {
        let p = self.probability(raw)?;
        let label = if p > 0.5 {
            ClassLabel::Epileptic
        } else {
            ClassLabel::Normal
        };
        Ok((label, p))
    }
}

pub fn predict(model: &MlpModel, fv: &FeatureVector) -> Result<(ClassLabel, f64)> {
    model.predict_row(&fv.to_array())
}

/// Train and also return the loss recorded before each update.
pub fn train_with_history(train: &LabeledFeatures, cfg: &TrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set has no rows".into()));
    }
    for class in ClassLabel::ALL {
        if !train.labels.contains(&class) {
            return Err(Error::invalid(format!("training set has no {class} rows")));
        }
    }
    let norm = Normalization::fit(&train.rows, train.width())?;
    for &c in &norm.dropped {
        log::warn!("dropping constant feature column {:?}", train.columns[c]);
    }
    let xs: Vec<Vec<f64>> = train.rows.iter().map(|r| norm.apply(r)).collect();
    let ys = train.targets();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Network::random(norm.kept.len(), cfg.hidden_dim, &mut rng);
    let mut params = net.params();
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let (loss, grad) = net.loss_and_gradient(&xs, &ys);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        history.push(loss);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        net.set_params(&params);
    }
    let final_loss = net.loss(&xs, &ys);
    if !final_loss.is_finite() {
        return Err(Error::Diverged {
            epoch: cfg.epochs,
            loss: final_loss,
        });
    }
    history.push(final_loss);

    let model = MlpModel {
        input_dim: train.width(),
        hidden_dim: cfg.hidden_dim,
        feature_names: train.columns.clone(),
        activation: Activations {
            hidden: "tanh".into(),
            output: "logistic".into(),
        },
        normalization: norm,
        network: net,
        config: *cfg,
        final_loss,
    };
    Ok((model, history))
}

pub fn train_features(train: &LabeledFeatures, cfg: &TrainConfig) -> Result<MlpModel> {
    train_with_history(train, cfg).map(|(m, _)| m)
}

pub fn train_mlp(train: &FeatureMatrix, cfg: &TrainConfig) -> Result<MlpModel> {
    train_features(&LabeledFeatures::from(train), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    /// Epileptic predicted Epileptic.
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub source_id: String,
    pub label: ClassLabel,
    pub predicted: ClassLabel,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: Confusion,
    pub predictions: Vec<Prediction>,
}

impl EvalReport {
    pub fn from_predictions(predictions: Vec<Prediction>) -> Result<Self> {
        if predictions.is_empty() {
            return Err(Error::Empty("no predictions to evaluate".into()));
        }
        let mut c = Confusion::default();
        for p in &predictions {
            match (p.label, p.predicted) {
                (ClassLabel::Epileptic, ClassLabel::Epileptic) => c.tp += 1,
                (ClassLabel::Normal, ClassLabel::Normal) => c.tn += 1,
                (ClassLabel::Normal, ClassLabel::Epileptic) => c.fp += 1,
                (ClassLabel::Epileptic, ClassLabel::Normal) => c.fn_ += 1,
            }
        }
        Ok(Self {
            accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
            confusion: c,
            predictions,
        })
    }
}

pub fn evaluate_features(model: &MlpModel, test: &LabeledFeatures) -> Result<EvalReport> {
    let predictions = test
        .rows
        .iter()
        .zip(test.ids.iter().zip(&test.labels))
        .map(|(row, (id, &label))| {
            let (predicted, probability) = model.predict_row(row)?;
            Ok(Prediction {
                source_id: id.clone(),
                label,
                predicted,
                probability,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(predictions)
}

pub fn evaluate(model: &MlpModel, test: &FeatureMatrix) -> Result<EvalReport> {
    evaluate_features(model, &LabeledFeatures::from(test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureBand;
    use crate::wavelet::SubBandId;

    fn table(rows: Vec<Vec<f64>>, labels: Vec<ClassLabel>) -> LabeledFeatures {
        let width = rows[0].len();
        LabeledFeatures::new(
            (0..width).map(|c| format!("f{c}")).collect(),
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            labels,
            rows,
        )
        .unwrap()
    }

    fn xor() -> LabeledFeatures {
        use ClassLabel::*;
        table(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![Normal, Epileptic, Epileptic, Normal],
        )
    }

    fn blobs(n: usize, seed: u64) -> LabeledFeatures {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let (cx, label) = if i % 2 == 0 {
                (-2.0, ClassLabel::Normal)
            } else {
                (2.0, ClassLabel::Epileptic)
            };
            rows.push(vec![cx + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            labels.push(label);
        }
        table(rows, labels)
    }

    fn matrix(n_per_class: usize) -> FeatureMatrix {
        let rows = (0..2 * n_per_class)
            .map(|i| FeatureRow {
                source_id: format!("s{i}"),
                label: if i < n_per_class {
                    ClassLabel::Normal
                } else {
                    ClassLabel::Epileptic
                },
                features: FeatureVector::from_array([i as f64; 6]),
            })
            .collect();
        FeatureMatrix::new(FeatureBand::SubBand(SubBandId::Delta), rows)
    }

    #[test]
    fn xor_is_learned() {
        let cfg = TrainConfig {
            hidden_dim: 4,
            learning_rate: 0.5,
            epochs: 5000,
            seed: 1,
            split_ratio: 0.5,
        };
        let data = xor();
        let model = train_features(&data, &cfg).unwrap();
        let report = evaluate_features(&model, &data).unwrap();
        assert_eq!(report.accuracy, 1.0, "{report:?}");
    }

    #[test]
    fn separable_blobs_are_learned() {
        let data = blobs(60, 2);
        let model = train_features(&data, &TrainConfig::default()).unwrap();
        assert_eq!(evaluate_features(&model, &data).unwrap().accuracy, 1.0);
    }

    #[test]
    fn small_steps_never_increase_loss() {
        let cfg = TrainConfig {
            hidden_dim: 5,
            learning_rate: 0.01,
            epochs: 500,
            seed: 3,
            split_ratio: 0.5,
        };
        let (_, history) = train_with_history(&blobs(40, 4), &cfg).unwrap();
        for w in history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_training_fails() {
        let mut data = blobs(10, 5);
        data.labels = vec![ClassLabel::Normal; 10];
        assert!(train_features(&data, &TrainConfig::default()).is_err());
    }

    #[test]
    fn divergence_reports_epoch() {
        let cfg = TrainConfig {
            learning_rate: f64::MAX,
            epochs: 50,
            ..TrainConfig::default()
        };
        // Each point appears with both labels, so the gradient never vanishes
        // and the oversized steps overflow the weights.
        let mut data = blobs(20, 6);
        data.labels.reverse();
        let mut twin = blobs(20, 6);
        data.rows.append(&mut twin.rows);
        data.labels.append(&mut twin.labels);
        data.ids = (0..40).map(|i| format!("r{i}")).collect();
        match train_features(&data, &cfg) {
            Err(Error::Diverged { epoch, loss }) => {
                assert!(epoch <= 50);
                assert!(!loss.is_finite());
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_network_predicts_one_half() {
        let data = blobs(10, 7);
        let mut model = train_features(
            &data,
            &TrainConfig {
                epochs: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        model.network = Network::zeros(model.network.input_dim, model.hidden_dim);
        for row in &data.rows {
            assert_eq!(model.probability(row).unwrap(), 0.5);
            assert_eq!(model.predict_row(row).unwrap().0, ClassLabel::Normal);
        }
    }

    #[test]
    fn probability_stays_open_interval() {
        let data = blobs(30, 8);
        let model = train_features(&data, &TrainConfig::default()).unwrap();
        for x in [-1e6, -50.0, 0.0, 50.0, 1e6] {
            let p = model.probability(&[x, 0.0]).unwrap();
            assert!(p > 0.0 && p < 1.0, "{p}");
        }
        assert!(model.probability(&[f64::NAN, 0.0]).is_err());
        assert!(model.probability(&[1.0]).is_err());
    }

    #[test]
    fn constant_columns_are_dropped() {
        let mut data = blobs(20, 9);
        for r in &mut data.rows {
            r.push(7.0);
        }
        data.columns.push("const".into());
        let model = train_features(&data, &TrainConfig { epochs: 10, ..TrainConfig::default() }).unwrap();
        assert_eq!(model.normalization.dropped, vec![2]);
        assert_eq!(model.network.input_dim, 2);
        assert!(model.probability(&[0.0, 0.0, 123.0]).is_ok());
    }

    #[test]
    fn normalized_training_columns_are_standard() {
        let data = blobs(50, 10);
        let norm = Normalization::fit(&data.rows, 2).unwrap();
        let z: Vec<Vec<f64>> = data.rows.iter().map(|r| norm.apply(r)).collect();
        for c in 0..2 {
            let n = z.len() as f64;
            let mean = z.iter().map(|r| r[c]).sum::<f64>() / n;
            let std = (z.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!(mean.abs() <= 1e-9);
            assert!((std - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = blobs(30, 11);
        let cfg = TrainConfig { epochs: 200, ..TrainConfig::default() };
        let a = train_features(&data, &cfg).unwrap();
        let b = train_features(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn model_json_round_trip() {
        let data = blobs(20, 12);
        let model = train_features(&data, &TrainConfig { epochs: 50, ..TrainConfig::default() }).unwrap();
        let back = MlpModel::from_json(&model.to_json().unwrap()).unwrap();
        for row in &data.rows {
            assert_eq!(model.probability(row).unwrap(), back.probability(row).unwrap());
        }
        let mut broken = model.clone();
        broken.network.output_weights.pop();
        assert!(MlpModel::from_json(&broken.to_json().unwrap()).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let d = rng.random_range(1..5);
            let h = rng.random_range(1..6);
            let net = Network::random(d, h, &mut rng);
            let xs: Vec<Vec<f64>> = (0..7)
                .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let ys: Vec<f64> = (0..7).map(|i| (i % 2) as f64).collect();
            let (_, grad) = net.loss_and_gradient(&xs, &ys);
            let p0 = net.params();
            let eps = 1e-5;
            let mut probe = net.clone();
            let numeric: Vec<f64> = (0..p0.len())
                .map(|i| {
                    let mut p = p0.clone();
                    p[i] += eps;
                    probe.set_params(&p);
                    let up = probe.loss(&xs, &ys);
                    p[i] -= 2.0 * eps;
                    probe.set_params(&p);
                    let down = probe.loss(&xs, &ys);
                    (up - down) / (2.0 * eps)
                })
                .collect();
            let diff: f64 = grad.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale = grad.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|a| a * a).sum::<f64>().sqrt());
            assert!(diff <= 1e-6 * scale, "rel = {}", diff / scale);
        }
    }

    #[test]
    fn stratified_split_counts() {
        let m = matrix(100);
        let (train, test) = split_dataset(&m, 0.5, 42).unwrap();
        assert_eq!((train.len(), test.len()), (100, 100));
        for side in [&train, &test] {
            assert_eq!(side.count(ClassLabel::Normal), 50);
            assert_eq!(side.count(ClassLabel::Epileptic), 50);
        }
        let mut ids: Vec<_> = train.rows.iter().chain(&test.rows).map(|r| r.source_id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 200);

        let (train2, test2) = split_dataset(&m, 0.5, 42).unwrap();
        assert_eq!((train, test), (train2, test2));
        let (train3, _) = split_dataset(&m, 0.5, 43).unwrap();
        assert_ne!(train3, split_dataset(&m, 0.5, 42).unwrap().0);
    }

    #[test]
    fn split_rejects_starved_classes() {
        assert!(split_dataset(&matrix(2), 0.99, 1).is_err());
        assert!(split_dataset(&matrix(2), 0.0, 1).is_err());
        let mut one_class = matrix(3);
        for r in &mut one_class.rows {
            r.label = ClassLabel::Normal;
        }
        assert!(split_dataset(&one_class, 0.5, 1).is_err());
    }

    #[test]
    fn report_arithmetic() {
        let mk = |label, predicted| Prediction {
            source_id: "x".into(),
            label,
            predicted,
            probability: 0.5,
        };
        use ClassLabel::*;
        let mut preds = Vec::new();
        preds.extend((0..50).map(|_| mk(Epileptic, Epileptic)));
        preds.extend((0..47).map(|_| mk(Normal, Normal)));
        preds.extend((0..2).map(|_| mk(Normal, Epileptic)));
        preds.push(mk(Epileptic, Normal));
        let r = EvalReport::from_predictions(preds).unwrap();
        assert_eq!(r.accuracy, 0.97);
        assert_eq!(r.confusion, Confusion { tp: 50, tn: 47, fp: 2, fn_: 1 });
        assert_eq!(r.confusion.total(), 100);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["confusion"]["fn"], 1);
    }

    #[test]
    fn concat_joins_bands() {
        let a = matrix(3);
        let mut b = matrix(3);
        b.band = FeatureBand::SubBand(SubBandId::Gamma);
        let joined = LabeledFeatures::concat(&[a, b.clone()]).unwrap();
        assert_eq!(joined.width(), 12);
        assert_eq!(joined.columns[6], "gamma_min");
        b.rows.swap(0, 1);
        assert!(LabeledFeatures::concat(&[matrix(3), b]).is_err());
    }
}
