//! One-vs-rest linear SVM over hashed n-gram features, optionally augmented
//! with per-label language-model log-likelihood ratios.
//!
//! ```
//! use elicit_core::classify::{train, Example, TrainConfig};
//!
//! let data = vec![
//!     Example::new("security", "passwords are stored hashed"),
//!     Example::new("security", "sessions expire after login"),
//!     Example::new("usability", "buttons are large and clear"),
//!     Example::new("usability", "menus are easy to learn"),
//! ];
//! let model = train(&data, &TrainConfig::default()).unwrap();
//! assert_eq!(model.labels(), ["security", "usability"]);
//! assert_eq!(model.predict("hashed passwords").label, "security");
//! ```

mod data;
mod features;
mod store;
pub mod svm;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ngram::NgramModel;
use crate::text::tokenize;

pub use data::{read_examples, read_examples_path};
pub use features::{
    fnv1a64, generative_features, hash_feature, hashed_features, FeatureConfig, FeatureVector,
    GENERATIVE_SCALE, HASH_DIM,
};
pub use store::MODEL_MAGIC;

use svm::Pegasos;

/// Order of the per-label and background language models.
pub const CLASS_LM_ORDER: usize = 2;

pub const DEFAULT_LABELS: [&str; 6] = [
    "F",
    "availability",
    "other-NFR",
    "performance",
    "security",
    "usability",
];

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("no training examples")]
    Empty,
    #[error("training data has a single label {0:?}; at least two are required")]
    SingleLabel(String),
    #[error("label {0:?} is not in the label set")]
    UnknownLabel(String),
    #[error("label set is invalid: {0}")]
    InvalidLabels(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("line {line}: {message}")]
    Data { line: u64, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("model checksum mismatch: expected {expected}, got {actual}")]
    Checksum { expected: String, actual: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub label: String,
    pub text: String,
}

impl Example {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        Example {
            label: label.into(),
            text: text.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 1e-3,
            epochs: 50,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hyper: Hyperparams,
    pub features: FeatureConfig,
    /// Label set. Empty means the distinct labels of the training data.
    pub labels: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hyper: Hyperparams::default(),
            features: FeatureConfig::default(),
            labels: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn with_default_labels(mut self) -> Self {
        self.labels = DEFAULT_LABELS.iter().map(|s| s.to_string()).collect();
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: String,
    /// `w_c . x + b_c` for every label.
    pub decisions: BTreeMap<String, f64>,
}

/// A trained classifier. Immutable; safe to share across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelArtifact {
    labels: Vec<String>,
    /// One vector of length `HASH_DIM + labels.len()` per label.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    hyper: Hyperparams,
    features: FeatureConfig,
    class_lms: Vec<NgramModel>,
    background: NgramModel,
}

fn check_labels(labels: &[String]) -> Result<(), ClassifierError> {
    if labels.is_empty() {
        return Err(ClassifierError::InvalidLabels("empty".into()));
    }
    if !labels.windows(2).all(|w| w[0] < w[1]) {
        return Err(ClassifierError::InvalidLabels(
            "labels must be unique and sorted".into(),
        ));
    }
    Ok(())
}

impl ModelArtifact {
    /// A model whose weights and biases are all zero. Every prediction is
    /// the first label.
    pub fn zero(labels: &[&str]) -> Result<Self, ClassifierError> {
        let mut labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        labels.sort();
        check_labels(&labels)?;
        let empty = NgramModel::count_ngrams(&[], CLASS_LM_ORDER).expect("order is positive");
        let dim = HASH_DIM + labels.len();
        Ok(ModelArtifact {
            weights: vec![vec![0.0; dim]; labels.len()],
            bias: vec![0.0; labels.len()],
            class_lms: vec![empty.clone(); labels.len()],
            background: empty,
            hyper: Hyperparams::default(),
            features: FeatureConfig::default(),
            labels,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self, label: usize) -> &[f64] {
        &self.weights[label]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.features
    }

    pub fn dim(&self) -> usize {
        HASH_DIM + self.labels.len()
    }

    pub fn vectorize(&self, text: &str) -> FeatureVector {
        features::vectorize_text(text, &self.features, &self.class_lms, &self.background)
    }

    /// Decision value per label, in label order.
    pub fn decide(&self, x: &FeatureVector) -> Vec<f64> {
        let row = x.row();
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| row.iter().map(|&(i, v)| w[i] * v).sum::<f64>() + b)
            .collect()
    }

    /// Index of the highest decision; the earliest label wins ties.
    fn argmax(decisions: &[f64]) -> usize {
        let mut best = 0;
        for (i, d) in decisions.iter().enumerate().skip(1) {
            if *d > decisions[best] {
                best = i;
            }
        }
        best
    }

    pub fn predict(&self, text: &str) -> Prediction {
        self.predict_vector(&self.vectorize(text))
    }

    pub fn predict_vector(&self, x: &FeatureVector) -> Prediction {
        let decisions = self.decide(x);
        let best = Self::argmax(&decisions);
        Prediction {
            label: self.labels[best].clone(),
            decisions: self.labels.iter().cloned().zip(decisions).collect(),
        }
    }

    pub fn evaluate(&self, examples: &[Example]) -> Result<Metrics, ClassifierError> {
        if examples.is_empty() {
            return Err(ClassifierError::Empty);
        }
        let mut pairs = Vec::with_capacity(examples.len());
        for ex in examples {
            if self.labels.binary_search(&ex.label).is_err() {
                return Err(ClassifierError::UnknownLabel(ex.label.clone()));
            }
            pairs.push((ex.label.clone(), self.predict(&ex.text).label));
        }
        Ok(Metrics::from_pairs(&self.labels, &pairs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_label: BTreeMap<String, LabelMetrics>,
}

impl Metrics {
    /// From `(gold, predicted)` pairs. A zero denominator yields 0.
    pub fn from_pairs(labels: &[String], pairs: &[(String, String)]) -> Metrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let correct = pairs.iter().filter(|(g, p)| g == p).count();
        let mut per_label = BTreeMap::new();
        for label in labels {
            let tp = pairs.iter().filter(|(g, p)| g == label && p == label).count();
            let predicted = pairs.iter().filter(|(_, p)| p == label).count();
            let support = pairs.iter().filter(|(g, _)| g == label).count();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_label.insert(
                label.clone(),
                LabelMetrics {
                    precision,
                    recall,
                    f1,
                    support,
                },
            );
        }
        let macro_f1 = if labels.is_empty() {
            0.0
        } else {
            per_label.values().map(|m| m.f1).sum::<f64>() / labels.len() as f64
        };
        Metrics {
            accuracy: ratio(correct, pairs.len()),
            macro_f1,
            per_label,
        }
    }
}

/// Per-epoch training diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    /// Sum over labels of `lambda/2 |theta|^2 + mean hinge` on the full set.
    pub objective: f64,
    pub train_accuracy: f64,
}

pub fn train(examples: &[Example], config: &TrainConfig) -> Result<ModelArtifact, ClassifierError> {
    train_inner(examples, config, false).map(|(m, _)| m)
}

/// Like [`train`], also returning objective and accuracy after each epoch.
pub fn train_traced(
    examples: &[Example],
    config: &TrainConfig,
) -> Result<(ModelArtifact, Vec<EpochTrace>), ClassifierError> {
    train_inner(examples, config, true)
}

fn train_inner(
    examples: &[Example],
    config: &TrainConfig,
    traced: bool,
) -> Result<(ModelArtifact, Vec<EpochTrace>), ClassifierError> {
    let hyper = config.hyper;
    if !(hyper.lambda > 0.0 && hyper.lambda.is_finite()) {
        return Err(ClassifierError::InvalidHyper(format!(
            "lambda must be positive, got {}",
            hyper.lambda
        )));
    }
    if hyper.epochs == 0 {
        return Err(ClassifierError::InvalidHyper("epochs must be at least 1".into()));
    }
    if examples.is_empty() {
        return Err(ClassifierError::Empty);
    }
    let distinct: BTreeSet<&str> = examples.iter().map(|e| e.label.as_str()).collect();
    if distinct.len() < 2 {
        return Err(ClassifierError::SingleLabel(examples[0].label.clone()));
    }
    let labels: Vec<String> = if config.labels.is_empty() {
        distinct.iter().map(|s| s.to_string()).collect()
    } else {
        let set: BTreeSet<&String> = config.labels.iter().collect();
        if set.len() != config.labels.len() {
            return Err(ClassifierError::InvalidLabels("duplicate label".into()));
        }
        set.into_iter().cloned().collect()
    };
    let mut gold = Vec::with_capacity(examples.len());
    for ex in examples {
        match labels.binary_search(&ex.label) {
            Ok(i) => gold.push(i),
            Err(_) => return Err(ClassifierError::UnknownLabel(ex.label.clone())),
        }
    }

    let tokenized: Vec<Vec<String>> = examples.iter().map(|e| tokenize(&e.text)).collect();
    let lm = |tokens: &[String]| {
        NgramModel::count_ngrams(tokens, CLASS_LM_ORDER).expect("order is positive")
    };
    let background = lm(&tokenized.concat());
    let class_lms: Vec<NgramModel> = (0..labels.len())
        .map(|c| {
            let texts: Vec<String> = tokenized
                .iter()
                .zip(&gold)
                .filter(|(_, &g)| g == c)
                .flat_map(|(t, _)| t.iter().cloned())
                .collect();
            lm(&texts)
        })
        .collect();

    let rows: Vec<Vec<(usize, f64)>> = tokenized
        .iter()
        .map(|t| features::vectorize_tokens(t, &config.features, &class_lms, &background).row())
        .collect();
    let targets: Vec<Vec<f64>> = (0..labels.len())
        .map(|c| gold.iter().map(|&g| if g == c { 1.0 } else { -1.0 }).collect())
        .collect();

    let dim = HASH_DIM + labels.len();
    let mut machines: Vec<Pegasos> = (0..labels.len()).map(|_| Pegasos::new(dim)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut trace = Vec::new();
    let mut t: u64 = 0;
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            for (c, m) in machines.iter_mut().enumerate() {
                m.step(&rows[i], targets[c][i], hyper.lambda, t);
            }
        }
        if traced {
            let objective = machines
                .iter()
                .zip(&targets)
                .map(|(m, ys)| m.objective(&rows, ys, hyper.lambda))
                .sum();
            let correct = rows
                .iter()
                .zip(&gold)
                .filter(|(x, &g)| {
                    let d: Vec<f64> = machines.iter().map(|m| m.decision(x)).collect();
                    ModelArtifact::argmax(&d) == g
                })
                .count();
            trace.push(EpochTrace {
                epoch,
                objective,
                train_accuracy: correct as f64 / rows.len() as f64,
            });
        }
    }

    let (weights, bias) = machines.into_iter().map(Pegasos::into_weights).unzip();
    Ok((
        ModelArtifact {
            labels,
            weights,
            bias,
            hyper,
            features: config.features,
            class_lms,
            background,
        },
        trace,
    ))
}
