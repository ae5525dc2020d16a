//! Live elicitation sessions.
//!
//! A session is the fold of an append-only log of records: a header, then
//! utterances, extraction events, ratings and finally a close marker. The
//! live [`Session`] appends to the log before changing its in-memory state,
//! and [`replay`] rebuilds the same state from the log without rerunning
//! extraction.

mod engine;
mod log;
mod recall;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{ExtractionConfig, RelevantTerm, WindowConfig};

pub use engine::{system_clock, Clock, Pipeline, Session};
pub use log::{replay, replay_path, LogRecord, LOG_VERSION};
pub use recall::{RecallSnippet, RecallSummary, RecallTerm};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session {0} is closed")]
    Closed(String),
    #[error("invalid utterance: {0}")]
    InvalidUtterance(String),
    #[error("unknown event {0}")]
    UnknownEvent(u64),
    #[error("unknown snippet {snippet_id:?} for event {event_id}")]
    UnknownSnippet { event_id: u64, snippet_id: String },
    #[error("stars must be between 1 and 5, got {0}")]
    InvalidStars(u8),
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("log write failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Replay { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub window: WindowConfig,
    pub extraction: ExtractionConfig,
    /// Snippets retrieved per event.
    pub retrieval_m: usize,
    /// Extraction runs only when the window holds at least this many tokens.
    pub min_tokens: usize,
    pub recency_decay: f64,
    pub rating_bonus: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            window: WindowConfig::default(),
            extraction: ExtractionConfig::default(),
            retrieval_m: 5,
            min_tokens: 5,
            recency_decay: 0.9,
            rating_bonus: 0.5,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |m: &str| Err(SessionError::InvalidConfig(m.into()));
        if self.retrieval_m == 0 {
            return bad("retrieval_m must be at least 1");
        }
        if self.min_tokens == 0 {
            return bad("min_tokens must be at least 1");
        }
        if self.window.token_budget == 0 || self.window.utterance_budget == 0 {
            return bad("window budgets must be at least 1");
        }
        if self.extraction.max_order == 0 {
            return bad("extraction.max_order must be at least 1");
        }
        if !(self.recency_decay > 0.0 && self.recency_decay <= 1.0) {
            return bad("recency_decay must be in (0, 1]");
        }
        if !self.rating_bonus.is_finite() {
            return bad("rating_bonus must be finite");
        }
        Ok(())
    }
}

/// A file the session depends on, identified by content hash.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub created_at_ms: u64,
    pub config: SessionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<ArtifactRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ArtifactRef>,
}

/// An utterance as delivered by the transcriber, before the session
/// assigns it an id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncomingUtterance {
    pub speaker: String,
    pub t_start_ms: u64,
    pub t_end_ms: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl IncomingUtterance {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.t_start_ms > self.t_end_ms {
            return Err(SessionError::InvalidUtterance(format!(
                "t_start_ms {} is after t_end_ms {}",
                self.t_start_ms, self.t_end_ms
            )));
        }
        if let Some(c) = self.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(SessionError::InvalidUtterance(format!(
                    "confidence {c} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub session_id: String,
    pub utterance_id: u64,
    pub speaker: String,
    pub t_start_ms: u64,
    pub t_end_ms: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

/// One retrieved snippet with its classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredSnippet {
    pub snippet_id: String,
    pub score: f64,
    pub label: String,
    pub decisions: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionEvent {
    pub event_id: u64,
    pub trigger_utterance_id: u64,
    pub window_utterance_ids: Vec<u64>,
    pub terms: Vec<RelevantTerm>,
    pub results: Vec<ScoredSnippet>,
    pub created_at_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub event_id: u64,
    pub snippet_id: String,
    pub stars: u8,
    pub rated_at_ms: u64,
}

/// Everything a session has recorded. Equal states imply equal logs up to
/// timestamps, and replaying a log yields an equal state.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionState {
    pub header: SessionHeader,
    pub utterances: Vec<Utterance>,
    pub events: Vec<ExtractionEvent>,
    /// Keyed by `(event_id, snippet_id)`; the latest rating wins.
    pub ratings: BTreeMap<(u64, String), Rating>,
    pub closed: bool,
}

impl SessionState {
    pub fn new(header: SessionHeader) -> Self {
        SessionState {
            header,
            utterances: Vec::new(),
            events: Vec::new(),
            ratings: BTreeMap::new(),
            closed: false,
        }
    }

    pub fn session_id(&self) -> &str {
        &self.header.session_id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.header.config
    }

    pub fn event(&self, event_id: u64) -> Option<&ExtractionEvent> {
        // Event ids are dense from 1.
        let i = usize::try_from(event_id).ok()?.checked_sub(1)?;
        self.events.get(i).filter(|e| e.event_id == event_id)
    }

    pub fn events_since(&self, since: u64) -> &[ExtractionEvent] {
        let start = self.events.partition_point(|e| e.event_id <= since);
        &self.events[start..]
    }

    pub fn next_utterance_id(&self) -> u64 {
        self.utterances.last().map_or(1, |u| u.utterance_id + 1)
    }

    pub fn next_event_id(&self) -> u64 {
        self.events.last().map_or(1, |e| e.event_id + 1)
    }

    /// Checks a rating against the recorded events.
    pub fn check_rating(&self, event_id: u64, snippet_id: &str, stars: u8) -> Result<(), SessionError> {
        if !(1..=5).contains(&stars) {
            return Err(SessionError::InvalidStars(stars));
        }
        let event = self
            .event(event_id)
            .ok_or(SessionError::UnknownEvent(event_id))?;
        if !event.results.iter().any(|r| r.snippet_id == snippet_id) {
            return Err(SessionError::UnknownSnippet {
                event_id,
                snippet_id: snippet_id.to_owned(),
            });
        }
        Ok(())
    }

    /// Folds one record into the state, rejecting records that break the
    /// id and reference invariants.
    pub fn apply(&mut self, record: LogRecord) -> Result<(), String> {
        if self.closed {
            return Err(format!("{} record after close", record.kind()));
        }
        match record {
            LogRecord::Session(_) => return Err("duplicate session header".into()),
            LogRecord::Utterance(u) => {
                if u.utterance_id < self.next_utterance_id() {
                    return Err(format!("utterance id {} is not increasing", u.utterance_id));
                }
                if u.session_id != self.header.session_id {
                    return Err(format!("utterance belongs to session {:?}", u.session_id));
                }
                self.utterances.push(u);
            }
            LogRecord::Event(e) => {
                if e.event_id != self.next_event_id() {
                    return Err(format!(
                        "event id {} out of sequence, expected {}",
                        e.event_id,
                        self.next_event_id()
                    ));
                }
                if !e.window_utterance_ids.contains(&e.trigger_utterance_id) {
                    return Err(format!(
                        "event {} trigger {} is outside its window",
                        e.event_id, e.trigger_utterance_id
                    ));
                }
                self.events.push(e);
            }
            LogRecord::Rating(r) => {
                self.check_rating(r.event_id, &r.snippet_id, r.stars)
                    .map_err(|e| e.to_string())?;
                self.ratings.insert((r.event_id, r.snippet_id.clone()), r);
            }
            LogRecord::Close { .. } => self.closed = true,
        }
        Ok(())
    }
}
