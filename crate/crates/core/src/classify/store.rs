//! Model files: a header line `ELIMDL1 <sha256 of body>` then a JSON body.
//! Weights are stored sparsely; floats round-trip exactly.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    check_labels, ClassifierError, FeatureConfig, Hyperparams, ModelArtifact, HASH_DIM,
};
use crate::ngram::NgramModel;

pub const MODEL_MAGIC: &str = "ELIMDL1";

#[derive(Serialize, Deserialize)]
struct StoredWeights {
    bias: f64,
    /// Non-zero `(index, value)` pairs, ascending.
    entries: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ModelBody {
    hash_dim: usize,
    labels: Vec<String>,
    hyper: Hyperparams,
    features: FeatureConfig,
    weights: Vec<StoredWeights>,
    class_lms: Vec<NgramModel>,
    background: NgramModel,
}

fn format_err(e: impl ToString) -> ClassifierError {
    ClassifierError::Format(e.to_string())
}

impl ModelArtifact {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let weights = self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &bias)| StoredWeights {
                bias,
                entries: w
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, &v)| (i, v))
                    .collect(),
            })
            .collect();
        let body = serde_json::to_vec(&ModelBody {
            hash_dim: HASH_DIM,
            labels: self.labels.clone(),
            hyper: self.hyper,
            features: self.features,
            weights,
            class_lms: self.class_lms.clone(),
            background: self.background.clone(),
        })?;
        writeln!(out, "{MODEL_MAGIC} {}", hex::encode(Sha256::digest(&body)))?;
        out.write_all(&body)?;
        out.write_all(b"\n")
    }

    pub fn read_from<R: Read>(input: R) -> Result<ModelArtifact, ClassifierError> {
        Self::read_verified(input).map(|(model, _)| model)
    }

    /// Also returns the verified body digest, a stable content id.
    pub fn read_verified<R: Read>(input: R) -> Result<(ModelArtifact, String), ClassifierError> {
        let mut reader = BufReader::new(input);
        let mut header = String::new();
        reader.read_line(&mut header).map_err(format_err)?;
        let expected = match header.trim_end().split_once(' ') {
            Some((MODEL_MAGIC, digest)) => digest.to_owned(),
            _ => {
                return Err(ClassifierError::Format(format!(
                    "expected {MODEL_MAGIC} header, found {:?}",
                    header.trim_end()
                )))
            }
        };
        let mut body = Vec::new();
        reader.read_to_end(&mut body).map_err(format_err)?;
        if body.last() == Some(&b'\n') {
            body.pop();
        }
        let actual = hex::encode(Sha256::digest(&body));
        if actual != expected {
            return Err(ClassifierError::Checksum { expected, actual });
        }
        let body: ModelBody = serde_json::from_slice(&body).map_err(format_err)?;
        if body.hash_dim != HASH_DIM {
            return Err(format_err(format!("unsupported hash dimension {}", body.hash_dim)));
        }
        check_labels(&body.labels)?;
        let n = body.labels.len();
        if body.weights.len() != n || body.class_lms.len() != n {
            return Err(format_err("per-label sections do not match the label count"));
        }
        let dim = HASH_DIM + n;
        let mut weights = Vec::with_capacity(n);
        let mut bias = Vec::with_capacity(n);
        for stored in body.weights {
            let mut w = vec![0.0; dim];
            for (i, v) in stored.entries {
                if i >= dim || !v.is_finite() {
                    return Err(format_err(format!("bad weight entry ({i}, {v})")));
                }
                w[i] = v;
            }
            weights.push(w);
            bias.push(stored.bias);
        }
        let model = ModelArtifact {
            labels: body.labels,
            weights,
            bias,
            hyper: body.hyper,
            features: body.features,
            class_lms: body.class_lms,
            background: body.background,
        };
        Ok((model, actual))
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        let io = |source| ClassifierError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
        self.write_to(&mut out).map_err(io)?;
        out.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<ModelArtifact, ClassifierError> {
        Self::load_verified(path).map(|(model, _)| model)
    }

    pub fn load_verified(path: &Path) -> Result<(ModelArtifact, String), ClassifierError> {
        let file = fs::File::open(path).map_err(|source| ClassifierError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ModelArtifact::read_verified(file)
    }
}
