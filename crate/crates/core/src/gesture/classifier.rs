//! Feed-forward gesture classifier: one ReLU hidden layer, softmax output, cross-entropy
//! loss, trained with seeded mini-batch gradient descent.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, FEATURE_DIM};
use super::{GestureClass, GestureError};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "gesture-mlp";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<T> {
    pub label: GestureClass,
    pub features: FeatureVector<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Fraction of each class held out for validation.
    pub validation_fraction: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { hidden: 32, epochs: 40, batch_size: 32, learning_rate: 0.05, momentum: 0.9, validation_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub epochs: usize,
    /// Full training-set loss after each epoch. Never increases: an epoch that would raise
    /// the loss is rolled back and the learning rate halved.
    pub loss_curve: Vec<f64>,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mlp<T> {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    /// hidden x input, row-major
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    /// output x hidden, row-major
    pub w2: Vec<T>,
    pub b2: Vec<T>,
    /// Inputs are standardized as `(x - mean) * scale` before the first layer.
    pub feature_mean: Vec<T>,
    pub feature_scale: Vec<T>,
    pub metadata: TrainingMetadata,
}

/// Parameter gradient with the same layout as [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: Vec<T>,
}

impl<T: Scalar> Gradient<T> {
    fn zeros_like(m: &Mlp<T>) -> Self {
        Self {
            w1: vec![T::zero(); m.w1.len()],
            b1: vec![T::zero(); m.b1.len()],
            w2: vec![T::zero(); m.w2.len()],
            b2: vec![T::zero(); m.b2.len()],
        }
    }

    pub fn tensors(&self) -> [&Vec<T>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn tensors_mut(&mut self) -> [&mut Vec<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelFile<T> {
    format: String,
    version: u32,
    model: Mlp<T>,
}

struct Activations<T> {
    input: Vec<T>,
    hidden_pre: Vec<T>,
    hidden: Vec<T>,
    probs: Vec<T>,
}

fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum = exps.iter().fold(T::zero(), |a, &b| a + b);
    exps.into_iter().map(|e| e / sum).collect()
}

impl<T: Scalar> Mlp<T> {
    /// All-zero network: every input yields uniform class probabilities.
    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            output_dim,
            w1: vec![T::zero(); hidden_dim * input_dim],
            b1: vec![T::zero(); hidden_dim],
            w2: vec![T::zero(); output_dim * hidden_dim],
            b2: vec![T::zero(); output_dim],
            feature_mean: vec![T::zero(); input_dim],
            feature_scale: vec![T::one(); input_dim],
            metadata: TrainingMetadata::default(),
        }
    }

    /// He-initialized hidden layer, variance-scaled output layer, zero biases.
    pub fn random(input_dim: usize, hidden_dim: usize, output_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut m = Self::zeros(input_dim, hidden_dim, output_dim);
        let n1 = Normal::new(0.0, (2.0 / input_dim as f64).sqrt()).expect("finite std");
        let n2 = Normal::new(0.0, (1.0 / hidden_dim as f64).sqrt()).expect("finite std");
        for w in m.w1.iter_mut() {
            *w = T::lit(n1.sample(rng));
        }
        for w in m.w2.iter_mut() {
            *w = T::lit(n2.sample(rng));
        }
        m
    }

    fn tensors_mut(&mut self) -> [&mut Vec<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    /// Mutable view of every trainable parameter, in `w1, b1, w2, b2` order.
    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.tensors_mut().into_iter().flat_map(|t| t.iter_mut())
    }

    pub fn num_parameters(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn check_input(&self, x: &[T]) -> Result<(), GestureError> {
        if x.len() != self.input_dim {
            return Err(GestureError::DimensionMismatch { expected: self.input_dim, actual: x.len() });
        }
        Ok(())
    }

    fn forward(&self, raw: &[T]) -> Activations<T> {
        let input: Vec<T> = raw
            .iter()
            .zip(self.feature_mean.iter().zip(&self.feature_scale))
            .map(|(&x, (&m, &s))| (x - m) * s)
            .collect();
        let mut hidden_pre = self.b1.clone();
        for (h, row) in hidden_pre.iter_mut().zip(self.w1.chunks_exact(self.input_dim)) {
            for (&w, &x) in row.iter().zip(&input) {
                *h += w * x;
            }
        }
        let hidden: Vec<T> = hidden_pre.iter().map(|&h| h.max(T::zero())).collect();
        let mut logits = self.b2.clone();
        for (z, row) in logits.iter_mut().zip(self.w2.chunks_exact(self.hidden_dim)) {
            for (&w, &h) in row.iter().zip(&hidden) {
                *z += w * h;
            }
        }
        Activations { input, hidden_pre, hidden, probs: softmax(&logits) }
    }

    /// Softmax class probabilities for raw (unstandardized) features.
    pub fn probabilities(&self, features: &[T]) -> Result<Vec<T>, GestureError> {
        self.check_input(features)?;
        Ok(self.forward(features).probs)
    }

    /// Mean cross-entropy over `batch` and its gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, batch: &[(&[T], usize)]) -> Result<(T, Gradient<T>), GestureError> {
        let mut grad = Gradient::zeros_like(self);
        let mut loss = T::zero();
        if batch.is_empty() {
            return Ok((loss, grad));
        }
        let inv_n = T::one() / T::lit(batch.len() as f64);
        let tiny = T::min_positive_value();
        for &(x, label) in batch {
            self.check_input(x)?;
            let act = self.forward(x);
            loss -= act.probs[label].max(tiny).ln();

            let mut d_logits = act.probs.clone();
            d_logits[label] -= T::one();
            let mut d_hidden = vec![T::zero(); self.hidden_dim];
            for (o, &dz) in d_logits.iter().enumerate() {
                let dz = dz * inv_n;
                grad.b2[o] += dz;
                let row = &self.w2[o * self.hidden_dim..(o + 1) * self.hidden_dim];
                let grow = &mut grad.w2[o * self.hidden_dim..(o + 1) * self.hidden_dim];
                for h in 0..self.hidden_dim {
                    grow[h] += dz * act.hidden[h];
                    d_hidden[h] += dz * row[h];
                }
            }
            for h in 0..self.hidden_dim {
                if act.hidden_pre[h] <= T::zero() {
                    continue;
                }
                let dh = d_hidden[h];
                grad.b1[h] += dh;
                let grow = &mut grad.w1[h * self.input_dim..(h + 1) * self.input_dim];
                for (g, &xi) in grow.iter_mut().zip(&act.input) {
                    *g += dh * xi;
                }
            }
        }
        Ok((loss * inv_n, grad))
    }

    pub fn save<W: Write>(&self, w: W) -> Result<(), GestureError> {
        let file = ModelFile { format: MODEL_FORMAT.to_string(), version: MODEL_VERSION, model: self.clone() };
        serde_json::to_writer_pretty(w, &file).map_err(|e| GestureError::Parse { line: 0, message: e.to_string() })
    }

    pub fn load<R: Read>(r: R) -> Result<Self, GestureError> {
        let file: ModelFile<T> =
            serde_json::from_reader(r).map_err(|e| GestureError::Parse { line: e.line(), message: e.to_string() })?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(GestureError::Parse {
                line: 0,
                message: format!("unsupported model container {} v{}", file.format, file.version),
            });
        }
        let m = file.model;
        let shapes_ok = m.w1.len() == m.hidden_dim * m.input_dim
            && m.b1.len() == m.hidden_dim
            && m.w2.len() == m.output_dim * m.hidden_dim
            && m.b2.len() == m.output_dim
            && m.feature_mean.len() == m.input_dim
            && m.feature_scale.len() == m.input_dim;
        if !shapes_ok {
            return Err(GestureError::Parse {
                line: 0,
                message: "model tensor shapes do not match declared dimensions".into(),
            });
        }
        Ok(m)
    }
}

/// Most probable gesture and its softmax probability. Ties resolve to the lower class index.
pub fn classify<T: Scalar>(model: &Mlp<T>, features: &FeatureVector<T>) -> Result<(GestureClass, T), GestureError> {
    if model.output_dim != GestureClass::COUNT {
        return Err(GestureError::DimensionMismatch { expected: GestureClass::COUNT, actual: model.output_dim });
    }
    let probs = model.probabilities(features.as_slice())?;
    let (best, p) =
        probs
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    let class = GestureClass::from_index(best).expect("output width equals class count");
    Ok((class, p))
}

pub fn accuracy<T: Scalar>(model: &Mlp<T>, samples: &[LabeledSample<T>]) -> Result<f64, GestureError> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for s in samples {
        if classify(model, &s.features)?.0 == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome<T> {
    pub model: Mlp<T>,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

const MIN_PER_CLASS: usize = 10;

fn full_loss<T: Scalar>(model: &Mlp<T>, batch: &[(&[T], usize)]) -> Result<f64, GestureError> {
    Ok(model.loss_and_gradient(batch)?.0.to_f64_lossy())
}

pub fn train_classifier<T: Scalar>(
    dataset: &[LabeledSample<T>],
    hyper: &Hyperparams,
    seed: u64,
) -> Result<TrainingOutcome<T>, GestureError> {
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); GestureClass::COUNT];
    for (i, s) in dataset.iter().enumerate() {
        if s.features.len() != FEATURE_DIM {
            return Err(GestureError::DimensionMismatch { expected: FEATURE_DIM, actual: s.features.len() });
        }
        if !s.features.is_finite() {
            return Err(GestureError::NonFiniteFeature);
        }
        per_class[s.label.index()].push(i);
    }
    let present: Vec<usize> = (0..GestureClass::COUNT).filter(|&c| !per_class[c].is_empty()).collect();
    if present.len() < 2 {
        return Err(GestureError::InsufficientData(format!("{} class(es) present, need at least 2", present.len())));
    }
    if let Some(&c) = present.iter().find(|&&c| per_class[c].len() < MIN_PER_CLASS) {
        return Err(GestureError::InsufficientData(format!(
            "class {} has {} samples, need at least {MIN_PER_CLASS}",
            GestureClass::from_index(c).unwrap(),
            per_class[c].len()
        )));
    }
    if hyper.hidden == 0 || hyper.batch_size == 0 || !(hyper.learning_rate > 0.0) {
        return Err(GestureError::InsufficientData("invalid hyperparameters".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // stratified split
    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    for &c in &present {
        let mut idx = per_class[c].clone();
        idx.shuffle(&mut rng);
        let n_val = ((idx.len() as f64) * hyper.validation_fraction).round() as usize;
        let n_val = n_val.min(idx.len() - 1);
        val_idx.extend_from_slice(&idx[..n_val]);
        train_idx.extend_from_slice(&idx[n_val..]);
    }
    train_idx.sort_unstable();
    val_idx.sort_unstable();

    let mut model = Mlp::<T>::random(FEATURE_DIM, hyper.hidden, GestureClass::COUNT, &mut rng);
    let n = train_idx.len() as f64;
    for d in 0..FEATURE_DIM {
        let mean = train_idx.iter().map(|&i| dataset[i].features.as_slice()[d].to_f64_lossy()).sum::<f64>() / n;
        let var =
            train_idx.iter().map(|&i| (dataset[i].features.as_slice()[d].to_f64_lossy() - mean).powi(2)).sum::<f64>()
                / n;
        model.feature_mean[d] = T::lit(mean);
        model.feature_scale[d] = T::lit(1.0 / var.sqrt().max(1e-6));
    }

    let all_train: Vec<(&[T], usize)> =
        train_idx.iter().map(|&i| (dataset[i].features.as_slice(), dataset[i].label.index())).collect();

    let mut lr = T::lit(hyper.learning_rate);
    let momentum = T::lit(hyper.momentum);
    let mut velocity = Gradient::zeros_like(&model);
    let mut best_loss = full_loss(&model, &all_train)?;
    let mut loss_curve = Vec::with_capacity(hyper.epochs);
    let mut order: Vec<usize> = (0..all_train.len()).collect();

    for _ in 0..hyper.epochs {
        let checkpoint = model.clone();
        order.shuffle(&mut rng);
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<(&[T], usize)> = chunk.iter().map(|&i| all_train[i]).collect();
            let (_, grad) = model.loss_and_gradient(&batch)?;
            for (p, (v, g)) in
                model.tensors_mut().into_iter().zip(velocity.tensors_mut().into_iter().zip(grad.tensors()))
            {
                for ((w, vel), &gr) in p.iter_mut().zip(v.iter_mut()).zip(g.iter()) {
                    *vel = momentum * *vel - lr * gr;
                    *w += *vel;
                }
            }
        }
        let epoch_loss = full_loss(&model, &all_train)?;
        if epoch_loss.is_finite() && epoch_loss <= best_loss {
            best_loss = epoch_loss;
        } else {
            model = checkpoint;
            velocity = Gradient::zeros_like(&model);
            lr *= T::lit(0.5);
        }
        loss_curve.push(best_loss);
    }

    let train_samples: Vec<LabeledSample<T>> = train_idx.iter().map(|&i| dataset[i].clone()).collect();
    let val_samples: Vec<LabeledSample<T>> = val_idx.iter().map(|&i| dataset[i].clone()).collect();
    let train_accuracy = accuracy(&model, &train_samples)?;
    let validation_accuracy = accuracy(&model, &val_samples)?;
    model.metadata = TrainingMetadata { seed, epochs: hyper.epochs, loss_curve, train_accuracy, validation_accuracy };
    Ok(TrainingOutcome { model, train_accuracy, validation_accuracy })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_dataset(n: usize) -> Vec<LabeledSample<f64>> {
        // two classes separated along the first feature
        (0..2 * n)
            .map(|i| {
                let label = if i % 2 == 0 { GestureClass::One } else { GestureClass::Two };
                let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
                let mut v = vec![0.0; FEATURE_DIM];
                v[0] = sign * (1.0 + (i as f64 * 0.37).sin().abs());
                for (d, x) in v.iter_mut().enumerate().skip(1) {
                    *x = ((i * 31 + d * 7) as f64).sin();
                }
                LabeledSample { label, features: FeatureVector::from_values(v) }
            })
            .collect()
    }

    #[test]
    fn uniform_model_gives_one_eighth() {
        let m = Mlp::<f64>::zeros(FEATURE_DIM, 4, 8);
        let f = FeatureVector::from_values(vec![0.3; FEATURE_DIM]);
        let (class, p) = classify(&m, &f).unwrap();
        assert_eq!(class, GestureClass::One);
        assert!((p - 0.125).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = Mlp::<f64>::zeros(FEATURE_DIM, 4, 8);
        let f = FeatureVector::from_values(vec![0.0; 12]);
        assert!(matches!(classify(&m, &f), Err(GestureError::DimensionMismatch { expected: 30, actual: 12 })));
    }

    #[test]
    fn separable_toy_set_reaches_full_validation_accuracy() {
        let out = train_classifier(&toy_dataset(40), &Hyperparams::default(), 1).unwrap();
        assert_eq!(out.validation_accuracy, 1.0);
        let curve = &out.model.metadata.loss_curve;
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn training_is_seed_deterministic() {
        let hp = Hyperparams { epochs: 5, ..Hyperparams::default() };
        let a = train_classifier(&toy_dataset(20), &hp, 9).unwrap().model;
        let b = train_classifier(&toy_dataset(20), &hp, 9).unwrap().model;
        assert_eq!(a, b);
        let c = train_classifier(&toy_dataset(20), &hp, 10).unwrap().model;
        assert_ne!(a.w1, c.w1);
    }

    #[test]
    fn rejects_small_or_single_class_sets() {
        let one_class: Vec<_> = toy_dataset(20).into_iter().filter(|s| s.label == GestureClass::One).collect();
        assert!(matches!(
            train_classifier(&one_class, &Hyperparams::default(), 0),
            Err(GestureError::InsufficientData(_))
        ));
        assert!(matches!(
            train_classifier(&toy_dataset(5), &Hyperparams::default(), 0),
            Err(GestureError::InsufficientData(_))
        ));
        let mut bad = toy_dataset(20);
        bad[3] = LabeledSample {
            label: GestureClass::One,
            features: FeatureVector::from_values(vec![f64::NAN; FEATURE_DIM]),
        };
        assert!(matches!(train_classifier(&bad, &Hyperparams::default(), 0), Err(GestureError::NonFiniteFeature)));
    }

    #[test]
    fn save_load_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Mlp::<f64>::random(FEATURE_DIM, 6, 8, &mut rng);
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        assert_eq!(Mlp::<f64>::load(&buf[..]).unwrap(), m);
        let text = String::from_utf8(buf).unwrap().replace("\"version\": 1", "\"version\": 7");
        assert!(Mlp::<f64>::load(text.as_bytes()).is_err());
    }

    #[test]
    fn f32_model_runs() {
        let m = Mlp::<f32>::zeros(FEATURE_DIM, 3, 8);
        let p = m.probabilities(&[0.5f32; FEATURE_DIM]).unwrap();
        let s: f32 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
    }
}
