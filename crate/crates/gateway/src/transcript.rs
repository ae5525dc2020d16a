//! Transcript files: one JSON object per line,
//! `{"speaker":"S1","t_start_ms":0,"t_end_ms":1200,"text":"...","confidence":0.93}`.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use elicit_core::session::IncomingUtterance;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Blank lines are skipped; any other malformed line aborts with its
/// 1-based line number.
pub fn read_transcript<R: Read>(input: R) -> Result<Vec<IncomingUtterance>, TranscriptError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| TranscriptError::Line {
            line: line_no,
            message,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let u: IncomingUtterance = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        u.validate().map_err(|e| err(e.to_string()))?;
        out.push(u);
    }
    Ok(out)
}

pub fn read_transcript_path(path: &Path) -> Result<Vec<IncomingUtterance>, TranscriptError> {
    let file = std::fs::File::open(path).map_err(|source| TranscriptError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_transcript(file)
}
