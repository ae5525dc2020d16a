//! Feeds a transcript through the HTTP API in process, honouring the
//! recorded gaps between utterances scaled by a speed factor.

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use serde::Serialize;
use thiserror::Error;

use elicit_core::session::IncomingUtterance;

use crate::api::call;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("speed factor must be finite and non-negative, got {0}")]
    BadSpeed(f64),
    #[error("{what} failed with {status}: {body}")]
    Request {
        what: String,
        status: StatusCode,
        body: String,
    },
}

#[derive(Clone, Debug)]
pub struct ReplayOutcome {
    pub session_id: String,
    pub utterances: usize,
    pub events: usize,
    /// Wall-clock time of each utterance request.
    pub latencies: Vec<Duration>,
    /// When each request was sent, relative to the first.
    pub sent_at: Vec<Duration>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles.
    pub fn from_durations(samples: &[Duration]) -> LatencyStats {
        let mut ms: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        ms.sort_by(f64::total_cmp);
        let rank = |p: f64| -> f64 {
            if ms.is_empty() {
                return 0.0;
            }
            let k = ((p * ms.len() as f64).ceil() as usize).clamp(1, ms.len());
            ms[k - 1]
        };
        LatencyStats {
            count: ms.len(),
            median_ms: rank(0.5),
            p99_ms: rank(0.99),
            max_ms: ms.last().copied().unwrap_or(0.0),
        }
    }
}

fn json_request(method: Method, uri: &str, body: String) -> Request<Body> {
    Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .expect("valid request")
}

/// Creates a session and posts every utterance to it. With `speed_factor`
/// 0 the utterances are sent back to back; otherwise utterance `i` is sent
/// `(t_start_i - t_start_0) / speed_factor` after the first.
pub async fn replay_transcript(
    router: &Router,
    transcript: &[IncomingUtterance],
    speed_factor: f64,
) -> Result<ReplayOutcome, HarnessError> {
    if !(speed_factor.is_finite() && speed_factor >= 0.0) {
        return Err(HarnessError::BadSpeed(speed_factor));
    }
    let (status, body) = call(router, json_request(Method::POST, "/sessions", String::new())).await;
    if status != StatusCode::CREATED {
        return Err(HarnessError::Request {
            what: "create session".into(),
            status,
            body: String::from_utf8_lossy(&body).into_owned(),
        });
    }
    #[derive(serde::Deserialize)]
    struct Created {
        session_id: String,
    }
    let session_id = serde_json::from_slice::<Created>(&body)
        .expect("create response has a session id")
        .session_id;

    let uri = format!("/sessions/{session_id}/utterances");
    let origin = Instant::now();
    let t0 = transcript.first().map_or(0, |u| u.t_start_ms);
    let mut outcome = ReplayOutcome {
        session_id,
        utterances: 0,
        events: 0,
        latencies: Vec::with_capacity(transcript.len()),
        sent_at: Vec::with_capacity(transcript.len()),
    };
    for u in transcript {
        if speed_factor > 0.0 {
            let offset = u.t_start_ms.saturating_sub(t0) as f64 / speed_factor;
            tokio::time::sleep_until((origin + Duration::from_secs_f64(offset / 1e3)).into()).await;
        }
        let body = serde_json::to_string(u).expect("utterances serialize");
        let sent = Instant::now();
        outcome.sent_at.push(sent - origin);
        let (status, body) = call(router, json_request(Method::POST, &uri, body)).await;
        outcome.latencies.push(sent.elapsed());
        if status != StatusCode::OK {
            return Err(HarnessError::Request {
                what: format!("utterance {}", outcome.utterances + 1),
                status,
                body: String::from_utf8_lossy(&body).into_owned(),
            });
        }
        outcome.utterances += 1;
        if !body.ends_with(b"\"event\":null}") {
            outcome.events += 1;
        }
    }
    Ok(outcome)
}
