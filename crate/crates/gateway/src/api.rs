//! HTTP API and per-session event streams.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::{Body, Bytes};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use elicit_core::session::{
    replay_path, Clock, ExtractionEvent, IncomingUtterance, LogRecord, Pipeline, Session,
    SessionConfig,
};

use crate::error::ApiError;

/// One stream frame: the record's log line. The frame name is the record
/// kind, except that extraction events are named `extraction`.
#[derive(Clone, Debug)]
pub struct Frame {
    pub kind: &'static str,
    pub event_id: Option<u64>,
    pub line: Arc<str>,
}

impl Frame {
    fn from_record(record: &LogRecord) -> Frame {
        Frame {
            kind: match record {
                LogRecord::Event(_) => "extraction",
                other => other.kind(),
            },
            event_id: match record {
                LogRecord::Event(e) => Some(e.event_id),
                _ => None,
            },
            line: record.to_line().into(),
        }
    }

    fn to_sse(&self) -> Event {
        let event = Event::default().event(self.kind).data(&*self.line);
        match self.event_id {
            Some(id) => event.id(id.to_string()),
            None => event,
        }
    }
}

struct SessionSlot {
    session: Mutex<Session>,
    frames: broadcast::Sender<Frame>,
}

struct Inner {
    pipeline: Arc<Pipeline>,
    config: SessionConfig,
    log_dir: Option<PathBuf>,
    clock: Clock,
    sessions: RwLock<BTreeMap<String, Arc<SessionSlot>>>,
    next_id: AtomicU64,
}

/// Shared service state. Sessions are independent; each is guarded by its
/// own lock, so requests to one session are applied one at a time.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

const STREAM_CAPACITY: usize = 1024;

impl AppState {
    /// In-memory sessions only.
    pub fn new(pipeline: Arc<Pipeline>, config: SessionConfig, clock: Clock) -> AppState {
        AppState {
            inner: Arc::new(Inner {
                pipeline,
                config,
                log_dir: None,
                clock,
                sessions: RwLock::new(BTreeMap::new()),
                next_id: AtomicU64::new(1),
            }),
        }
    }

    /// Sessions logged under `dir`, one `<session_id>.jsonl` file each.
    /// Existing logs are replayed and reopened for appending.
    pub fn with_log_dir(
        pipeline: Arc<Pipeline>,
        config: SessionConfig,
        clock: Clock,
        dir: &Path,
    ) -> anyhow::Result<AppState> {
        fs::create_dir_all(dir)?;
        let state = AppState {
            inner: Arc::new(Inner {
                pipeline,
                config,
                log_dir: Some(dir.to_path_buf()),
                clock,
                sessions: RwLock::new(BTreeMap::new()),
                next_id: AtomicU64::new(1),
            }),
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let replayed = replay_path(&path)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            if replayed.session_id().is_empty() {
                continue;
            }
            let file = OpenOptions::new().append(true).open(&path)?;
            let session = Session::resume(
                replayed,
                state.inner.pipeline.clone(),
                Some(Box::new(file)),
                state.inner.clock.clone(),
            );
            state.insert(session);
        }
        Ok(state)
    }

    pub fn pipeline(&self) -> &Arc<Pipeline> {
        &self.inner.pipeline
    }

    fn insert(&self, session: Session) {
        let id = session.session_id().to_owned();
        let slot = Self::make_slot(session);
        self.inner.sessions.write().unwrap().insert(id, slot);
    }

    fn make_slot(mut session: Session) -> Arc<SessionSlot> {
        let (tx, _) = broadcast::channel(STREAM_CAPACITY);
        let sender = tx.clone();
        session.set_listener(move |record| {
            // No subscribers is fine.
            let _ = sender.send(Frame::from_record(record));
        });
        Arc::new(SessionSlot {
            session: Mutex::new(session),
            frames: tx,
        })
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        self.inner
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session {id:?}")))
    }

    fn valid_session_id(id: &str) -> bool {
        !id.is_empty()
            && id.len() <= 64
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    }

    /// Creates a session, with a generated id unless one is given.
    pub fn create_session(
        &self,
        session_id: Option<String>,
        config: Option<SessionConfig>,
    ) -> Result<String, ApiError> {
        let config = config.unwrap_or(self.inner.config);
        config.validate()?;
        let mut sessions = self.inner.sessions.write().unwrap();
        let id = match session_id {
            Some(id) => {
                if !Self::valid_session_id(&id) {
                    return Err(ApiError::bad_request(
                        "session_id must be 1-64 characters of [A-Za-z0-9_-]",
                    ));
                }
                if sessions.contains_key(&id) {
                    return Err(ApiError::conflict(format!("session {id:?} already exists")));
                }
                id
            }
            None => loop {
                let n = self.inner.next_id.fetch_add(1, Ordering::Relaxed);
                let id = format!("s{n:05}");
                if !sessions.contains_key(&id) {
                    break id;
                }
            },
        };
        let log: Option<Box<dyn std::io::Write + Send>> = match &self.inner.log_dir {
            Some(dir) => {
                let path = dir.join(format!("{id}.jsonl"));
                let file = OpenOptions::new()
                    .create_new(true)
                    .append(true)
                    .open(&path)
                    .map_err(|e| {
                        ApiError::internal("cannot create session log")
                            .with_detail(format!("{}: {e}", path.display()))
                    })?;
                Some(Box::new(std::io::BufWriter::new(file)))
            }
            None => None,
        };
        let session = Session::create(
            id.clone(),
            config,
            self.inner.pipeline.clone(),
            log,
            self.inner.clock.clone(),
        )?;
        sessions.insert(id.clone(), Self::make_slot(session));
        Ok(id)
    }

    pub fn append_utterance(
        &self,
        session_id: &str,
        utterance: IncomingUtterance,
    ) -> Result<(u64, Option<ExtractionEvent>), ApiError> {
        let slot = self.slot(session_id)?;
        let mut session = slot.session.lock().unwrap();
        Ok(session.append_utterance(utterance)?)
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.inner.sessions.read().unwrap().keys().cloned().collect()
    }

    /// Runs `f` on a session under its lock.
    pub fn with_session<T>(
        &self,
        session_id: &str,
        f: impl FnOnce(&mut Session) -> T,
    ) -> Result<T, ApiError> {
        let slot = self.slot(session_id)?;
        let mut session = slot.session.lock().unwrap();
        Ok(f(&mut session))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}/utterances", post(post_utterance).get(get_utterances))
        .route("/sessions/{id}/events", get(get_events))
        .route("/sessions/{id}/stream", get(stream_session))
        .route("/sessions/{id}/ratings", put(put_rating))
        .route("/sessions/{id}/recall", get(get_recall))
        .route("/sessions/{id}/close", post(close_session))
        .route("/snippets/{*snippet_id}", get(get_snippet))
        .with_state(state)
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request("malformed request body").with_detail(e.to_string()))
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

/// Runs blocking session work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal("worker failed").with_detail(e.to_string()))?
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    session_id: Option<String>,
    config: Option<SessionConfig>,
}

#[derive(Serialize)]
struct Created {
    session_id: String,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSession::default()
    } else {
        parse_json(&body)?
    };
    let session_id = blocking(move || state.create_session(req.session_id, req.config)).await?;
    Ok((StatusCode::CREATED, Json(Created { session_id })).into_response())
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<String>> {
    Json(state.session_ids())
}

/// Body: `{"utterance_id": n, "event": <event or null>}`. The event bytes
/// are exactly those written to the session log.
pub fn utterance_response_body(utterance_id: u64, event: Option<&ExtractionEvent>) -> String {
    let event = match event {
        Some(e) => serde_json::to_string(e).expect("events serialize"),
        None => "null".to_owned(),
    };
    format!("{{\"utterance_id\":{utterance_id},\"event\":{event}}}")
}

async fn post_utterance(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let utterance: IncomingUtterance = parse_json(&body)?;
    let (utterance_id, event) = blocking(move || state.append_utterance(&id, utterance)).await?;
    Ok(json_response(
        StatusCode::OK,
        utterance_response_body(utterance_id, event.as_ref()),
    ))
}

async fn get_utterances(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let body = state.with_session(&id, |s| {
        serde_json::to_string(&s.state().utterances).expect("utterances serialize")
    })?;
    Ok(json_response(StatusCode::OK, body))
}

#[derive(Deserialize)]
struct Since {
    since: Option<u64>,
}

async fn get_events(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<Since>,
) -> Result<Response, ApiError> {
    let body = state.with_session(&id, |s| {
        serde_json::to_string(s.state().events_since(q.since.unwrap_or(0)))
            .expect("events serialize")
    })?;
    Ok(json_response(StatusCode::OK, body))
}

/// Backfills events after `since` (or the `Last-Event-ID` header), then
/// forwards live frames.
async fn stream_session(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<Since>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let since = q.since.or_else(|| {
        headers
            .get("last-event-id")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse().ok())
    });
    let slot = state.slot(&id)?;
    // Subscribing under the session lock means no frame falls between the
    // backfill snapshot and the live feed.
    let (backfill, rx) = {
        let session = slot.session.lock().unwrap();
        let backfill: Vec<Frame> = match since {
            Some(since) => session
                .state()
                .events_since(since)
                .iter()
                .map(|e| Frame::from_record(&LogRecord::Event(e.clone())))
                .collect(),
            None => Vec::new(),
        };
        (backfill, slot.frames.subscribe())
    };
    let floor = since.unwrap_or(0);
    let live = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(frame) => return Some((frame, rx)),
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    })
    .filter(move |f| std::future::ready(f.event_id.is_none_or(|id| id > floor)));
    let frames = stream::iter(backfill)
        .chain(live)
        .map(|f| Ok(f.to_sse()));
    Ok(Sse::new(frames).keep_alive(KeepAlive::default()))
}

#[derive(Deserialize)]
struct RatingRequest {
    event_id: u64,
    snippet_id: String,
    stars: u8,
}

async fn put_rating(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: RatingRequest = parse_json(&body)?;
    let rating = blocking(move || {
        state
            .with_session(&id, |s| s.record_rating(req.event_id, &req.snippet_id, req.stars))?
            .map_err(ApiError::from)
    })
    .await?;
    Ok(Json(rating).into_response())
}

#[derive(Deserialize)]
struct TopN {
    top_n: Option<usize>,
}

async fn get_recall(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<TopN>,
) -> Result<Response, ApiError> {
    let summary = state.with_session(&id, |s| s.resume_summary(q.top_n.unwrap_or(10)))?;
    Ok(Json(summary).into_response())
}

async fn close_session(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    blocking(move || state.with_session(&id, |s| s.close())?.map_err(ApiError::from)).await?;
    Ok(json_response(StatusCode::OK, "{\"closed\":true}".into()))
}

async fn get_snippet(
    State(state): State<AppState>,
    UrlPath(snippet_id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let index = &state.pipeline().index;
    let snippet = index
        .snippet(&snippet_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown snippet {snippet_id:?}")))?;
    Ok(Json(snippet).into_response())
}

/// Sends one request through the router in process.
pub async fn call(router: &Router, request: axum::http::Request<Body>) -> (StatusCode, Bytes) {
    use tower::ServiceExt;
    let response = router
        .clone()
        .oneshot(request)
        .await
        .expect("router is infallible");
    let status = response.status();
    let body = axum::body::to_bytes(response.into_body(), usize::MAX)
        .await
        .expect("in-memory body");
    (status, body)
}
