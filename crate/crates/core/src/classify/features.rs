//! Feature extraction: signed hashed n-gram counts plus per-label
//! language-model log-likelihood ratios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ngram::NgramModel;
use crate::text::tokenize;

/// Number of hashed feature buckets.
pub const HASH_DIM: usize = 1 << 18;

/// Scale applied to the generative features.
pub const GENERATIVE_SCALE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub bigrams: bool,
    pub generative: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            bigrams: true,
            generative: true,
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Bucket and sign for a feature string: `h mod HASH_DIM`, negative when
/// `h` has an odd number of set bits.
pub fn hash_feature(feature: &str) -> (usize, f64) {
    let h = fnv1a64(feature.as_bytes());
    let sign = if h.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
    ((h % HASH_DIM as u64) as usize, sign)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    /// `(bucket, value)` sorted by bucket, zeros omitted, L2 norm 1 unless
    /// empty.
    pub sparse: Vec<(usize, f64)>,
    /// One generative feature per label.
    pub dense: Vec<f64>,
}

impl FeatureVector {
    /// Flattened over `HASH_DIM + dense.len()` dimensions.
    pub fn row(&self) -> Vec<(usize, f64)> {
        let mut row = self.sparse.clone();
        row.extend(
            self.dense
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (HASH_DIM + i, v)),
        );
        row
    }

    pub fn sparse_norm(&self) -> f64 {
        self.sparse.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

/// Signed, L2-normalized hashed unigram (and optionally bigram) counts.
pub fn hashed_features(tokens: &[String], bigrams: bool) -> Vec<(usize, f64)> {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for tok in tokens {
        let (i, s) = hash_feature(tok);
        *acc.entry(i).or_insert(0.0) += s;
    }
    if bigrams {
        for pair in tokens.windows(2) {
            let (i, s) = hash_feature(&format!("{} {}", pair[0], pair[1]));
            *acc.entry(i).or_insert(0.0) += s;
        }
    }
    let norm = acc.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Vec::new();
    }
    acc.into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(i, v)| (i, v / norm))
        .collect()
}

/// `0.1 * (background_nll - class_nll) / token_count` per class; zeros for
/// empty input.
pub fn generative_features(
    tokens: &[String],
    class_lms: &[NgramModel],
    background: &NgramModel,
) -> Vec<f64> {
    if tokens.is_empty() {
        return vec![0.0; class_lms.len()];
    }
    let n = tokens.len() as f64;
    let bg = background.sequence_nll(tokens);
    class_lms
        .iter()
        .map(|lm| GENERATIVE_SCALE * (bg - lm.sequence_nll(tokens)) / n)
        .collect()
}

pub(crate) fn vectorize_tokens(
    tokens: &[String],
    config: &FeatureConfig,
    class_lms: &[NgramModel],
    background: &NgramModel,
) -> FeatureVector {
    let dense = if config.generative {
        generative_features(tokens, class_lms, background)
    } else {
        vec![0.0; class_lms.len()]
    };
    FeatureVector {
        sparse: hashed_features(tokens, config.bigrams),
        dense,
    }
}

pub(crate) fn vectorize_text(
    text: &str,
    config: &FeatureConfig,
    class_lms: &[NgramModel],
    background: &NgramModel,
) -> FeatureVector {
    vectorize_tokens(&tokenize(text), config, class_lms, background)
}
