//! Service and command-line surfaces for the elicitation assistant: an HTTP
//! API with a per-session event stream, offline document extraction, and a
//! transcript replay harness.

pub mod api;
pub mod config;
pub mod error;
pub mod harness;
pub mod offline;
pub mod transcript;

use std::path::Path;
use std::sync::Arc;

use elicit_core::classify::ModelArtifact;
use elicit_core::index::SnippetIndex;
use elicit_core::session::{ArtifactRef, Pipeline};

pub use api::{router, AppState};
pub use error::{ApiError, ErrorCode};

/// Loads and checksum-verifies the index and model files.
pub fn load_pipeline(index_path: &Path, model_path: &Path) -> anyhow::Result<Pipeline> {
    let (index, index_sha) = SnippetIndex::load_verified(index_path)
        .map_err(|e| anyhow::anyhow!("cannot load index {}: {e}", index_path.display()))?;
    let (model, model_sha) = ModelArtifact::load_verified(model_path)
        .map_err(|e| anyhow::anyhow!("cannot load model {}: {e}", model_path.display()))?;
    let mut pipeline = Pipeline::new(Arc::new(index), Arc::new(model));
    pipeline.index_ref = Some(ArtifactRef {
        path: index_path.display().to_string(),
        sha256: index_sha,
    });
    pipeline.model_ref = Some(ArtifactRef {
        path: model_path.display().to_string(),
        sha256: model_sha,
    });
    Ok(pipeline)
}
