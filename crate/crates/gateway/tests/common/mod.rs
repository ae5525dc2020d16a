#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::{Body, Bytes};
use axum::http::{Method, Request, StatusCode};
use axum::Router;

use elicit_core::classify::{read_examples_path, train, ModelArtifact, TrainConfig};
use elicit_core::index::{load_corpus_dir, SnippetIndex};
use elicit_core::session::{Clock, Pipeline};
use elicit_gateway::api::call;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_index() -> SnippetIndex {
    let docs = load_corpus_dir(&fixtures().join("corpus")).unwrap();
    SnippetIndex::ingest_corpus(docs).unwrap()
}

pub fn fixture_model() -> ModelArtifact {
    let examples = read_examples_path(&fixtures().join("train.csv")).unwrap();
    train(&examples, &TrainConfig::default()).unwrap()
}

pub fn fixture_pipeline() -> Arc<Pipeline> {
    Arc::new(Pipeline::new(
        Arc::new(fixture_index()),
        Arc::new(fixture_model()),
    ))
}

pub fn step_clock() -> Clock {
    let t = Arc::new(Mutex::new(1_700_000_000_000u64));
    Arc::new(move || {
        let mut t = t.lock().unwrap();
        *t += 1;
        *t
    })
}

pub async fn send(router: &Router, method: Method, uri: &str, body: &str) -> (StatusCode, Bytes) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap();
    call(router, request).await
}

pub fn json(body: &Bytes) -> serde_json::Value {
    serde_json::from_slice(body).unwrap()
}
