//! Line-delimited session log.
//!
//! Each line is `{"v":1,"kind":K,"data":{...}}` with `K` one of `session`,
//! `utterance`, `event`, `rating` or `close`. The first line of a non-empty
//! log is the `session` header.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    ExtractionEvent, Rating, SessionConfig, SessionError, SessionHeader, SessionState, Utterance,
};

pub const LOG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum LogRecord {
    Session(SessionHeader),
    Utterance(Utterance),
    Event(ExtractionEvent),
    Rating(Rating),
    Close { closed_at_ms: u64 },
}

#[derive(Serialize)]
struct LineOut<'a, T> {
    v: u32,
    kind: &'a str,
    data: &'a T,
}

#[derive(Deserialize)]
struct LineIn {
    v: u32,
    kind: String,
    data: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct CloseData {
    closed_at_ms: u64,
}

impl LogRecord {
    pub fn kind(&self) -> &'static str {
        match self {
            LogRecord::Session(_) => "session",
            LogRecord::Utterance(_) => "utterance",
            LogRecord::Event(_) => "event",
            LogRecord::Rating(_) => "rating",
            LogRecord::Close { .. } => "close",
        }
    }

    /// One JSON line, without the trailing newline.
    pub fn to_line(&self) -> String {
        fn line<T: Serialize>(kind: &str, data: &T) -> String {
            serde_json::to_string(&LineOut {
                v: LOG_VERSION,
                kind,
                data,
            })
            .expect("log records serialize")
        }
        match self {
            LogRecord::Session(h) => line(self.kind(), h),
            LogRecord::Utterance(u) => line(self.kind(), u),
            LogRecord::Event(e) => line(self.kind(), e),
            LogRecord::Rating(r) => line(self.kind(), r),
            LogRecord::Close { closed_at_ms } => line(
                self.kind(),
                &CloseData {
                    closed_at_ms: *closed_at_ms,
                },
            ),
        }
    }

    pub fn parse_line(line: &str) -> Result<LogRecord, String> {
        let raw: LineIn = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if raw.v != LOG_VERSION {
            return Err(format!(
                "unsupported log version {}, expected {LOG_VERSION}",
                raw.v
            ));
        }
        fn data<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, String> {
            serde_json::from_value(v).map_err(|e| e.to_string())
        }
        Ok(match raw.kind.as_str() {
            "session" => LogRecord::Session(data(raw.data)?),
            "utterance" => LogRecord::Utterance(data(raw.data)?),
            "event" => LogRecord::Event(data(raw.data)?),
            "rating" => LogRecord::Rating(data(raw.data)?),
            "close" => {
                let c: CloseData = data(raw.data)?;
                LogRecord::Close {
                    closed_at_ms: c.closed_at_ms,
                }
            }
            other => return Err(format!("unknown record kind {other:?}")),
        })
    }
}

/// Rebuilds a session from its log. Extraction is not rerun; recorded
/// events are taken as they are. An empty log gives an empty session.
pub fn replay<R: Read>(input: R) -> Result<SessionState, SessionError> {
    let mut state: Option<SessionState> = None;
    let mut reader = BufReader::new(input);
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let err = |message: String| SessionError::Replay {
            line: line_no,
            message,
        };
        let line = buf.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        let record = LogRecord::parse_line(line).map_err(err)?;
        match (&mut state, record) {
            (None, LogRecord::Session(header)) => state = Some(SessionState::new(header)),
            (None, other) => {
                return Err(err(format!(
                    "expected session header, found {} record",
                    other.kind()
                )))
            }
            (Some(s), record) => s.apply(record).map_err(err)?,
        }
    }
    Ok(state.unwrap_or_else(|| {
        SessionState::new(SessionHeader {
            session_id: String::new(),
            created_at_ms: 0,
            config: SessionConfig::default(),
            index: None,
            model: None,
        })
    }))
}

pub fn replay_path(path: &Path) -> Result<SessionState, SessionError> {
    replay(std::fs::File::open(path)?)
}
