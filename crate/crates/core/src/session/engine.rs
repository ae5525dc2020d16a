use std::io::Write;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use super::{
    ArtifactRef, ExtractionEvent, IncomingUtterance, LogRecord, Rating, RecallSummary,
    ScoredSnippet, SessionConfig, SessionError, SessionHeader, SessionState, Utterance,
};
use crate::classify::ModelArtifact;
use crate::extract::{build_window, extract_relevant_terms, RelevantTerm, WindowState};
use crate::index::SnippetIndex;
use crate::text::Stopwords;

/// Milliseconds since the Unix epoch.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64)
    })
}

/// The shared, read-only analysis resources: index, classifier and
/// stopword list.
pub struct Pipeline {
    pub index: Arc<SnippetIndex>,
    pub model: Arc<ModelArtifact>,
    pub stopwords: Stopwords,
    pub index_ref: Option<ArtifactRef>,
    pub model_ref: Option<ArtifactRef>,
}

impl Pipeline {
    pub fn new(index: Arc<SnippetIndex>, model: Arc<ModelArtifact>) -> Self {
        Pipeline {
            index,
            model,
            stopwords: Stopwords::default(),
            index_ref: None,
            model_ref: None,
        }
    }

    /// Extract, retrieve and classify for one window.
    pub fn analyze(
        &self,
        window: &WindowState,
        config: &SessionConfig,
    ) -> (Vec<RelevantTerm>, Vec<ScoredSnippet>) {
        let terms = extract_relevant_terms(window, &self.index, &config.extraction, &self.stopwords);
        let ranked = self
            .index
            .retrieve(&terms, config.retrieval_m.max(1))
            .expect("m is at least 1");
        let results = ranked
            .into_iter()
            .map(|r| {
                let p = self.model.predict(&r.snippet.text);
                ScoredSnippet {
                    snippet_id: r.snippet.snippet_id.clone(),
                    score: r.score,
                    label: p.label,
                    decisions: p.decisions,
                }
            })
            .collect();
        (terms, results)
    }
}

type Listener = Box<dyn FnMut(&LogRecord) + Send>;

/// A live session. Operations take `&mut self`, so one writer at a time.
pub struct Session {
    state: SessionState,
    pipeline: Arc<Pipeline>,
    log: Option<Box<dyn Write + Send>>,
    clock: Clock,
    listener: Option<Listener>,
}

impl Session {
    /// Opens a session and writes its header to `log`, if any.
    pub fn create(
        session_id: impl Into<String>,
        config: SessionConfig,
        pipeline: Arc<Pipeline>,
        log: Option<Box<dyn Write + Send>>,
        clock: Clock,
    ) -> Result<Session, SessionError> {
        config.validate()?;
        let header = SessionHeader {
            session_id: session_id.into(),
            created_at_ms: clock(),
            config,
            index: pipeline.index_ref.clone(),
            model: pipeline.model_ref.clone(),
        };
        let mut session = Session {
            state: SessionState::new(header.clone()),
            pipeline,
            log,
            clock,
            listener: None,
        };
        session.persist(&LogRecord::Session(header))?;
        Ok(session)
    }

    /// Continues a replayed session, appending to `log`.
    pub fn resume(
        state: SessionState,
        pipeline: Arc<Pipeline>,
        log: Option<Box<dyn Write + Send>>,
        clock: Clock,
    ) -> Session {
        Session {
            state,
            pipeline,
            log,
            clock,
            listener: None,
        }
    }

    /// Called with every record after it is persisted.
    pub fn set_listener(&mut self, listener: impl FnMut(&LogRecord) + Send + 'static) {
        self.listener = Some(Box::new(listener));
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn session_id(&self) -> &str {
        self.state.session_id()
    }

    pub fn pipeline(&self) -> &Arc<Pipeline> {
        &self.pipeline
    }

    fn persist(&mut self, record: &LogRecord) -> Result<(), SessionError> {
        if let Some(log) = self.log.as_mut() {
            let mut line = record.to_line();
            line.push('\n');
            log.write_all(line.as_bytes())?;
            log.flush()?;
        }
        Ok(())
    }

    fn commit(&mut self, record: LogRecord) -> Result<(), SessionError> {
        self.persist(&record)?;
        if let Some(listener) = self.listener.as_mut() {
            listener(&record);
        }
        self.state
            .apply(record)
            .expect("records built by the session satisfy its invariants");
        Ok(())
    }

    fn ensure_open(&self) -> Result<(), SessionError> {
        if self.state.closed {
            return Err(SessionError::Closed(self.session_id().to_owned()));
        }
        Ok(())
    }

    pub fn window(&self) -> WindowState {
        let cfg = &self.state.config().window;
        let utts = &self.state.utterances;
        let recent: Vec<(u64, &str)> = utts[utts.len().saturating_sub(cfg.utterance_budget)..]
            .iter()
            .map(|u| (u.utterance_id, u.text.as_str()))
            .collect();
        build_window(&recent, cfg, &self.pipeline.stopwords)
    }

    /// Records the utterance, then runs extraction if the window is large
    /// enough. Returns the assigned utterance id and the event, if any.
    pub fn append_utterance(
        &mut self,
        incoming: IncomingUtterance,
    ) -> Result<(u64, Option<ExtractionEvent>), SessionError> {
        self.ensure_open()?;
        incoming.validate()?;
        let utterance_id = self.state.next_utterance_id();
        self.commit(LogRecord::Utterance(Utterance {
            session_id: self.session_id().to_owned(),
            utterance_id,
            speaker: incoming.speaker,
            t_start_ms: incoming.t_start_ms,
            t_end_ms: incoming.t_end_ms,
            text: incoming.text,
            confidence: incoming.confidence,
        }))?;

        let window = self.window();
        let config = *self.state.config();
        if window.len() < config.min_tokens {
            return Ok((utterance_id, None));
        }
        let (terms, results) = self.pipeline.analyze(&window, &config);
        let event = ExtractionEvent {
            event_id: self.state.next_event_id(),
            trigger_utterance_id: utterance_id,
            window_utterance_ids: window.utterance_ids,
            terms,
            results,
            created_at_ms: (self.clock)(),
        };
        self.commit(LogRecord::Event(event.clone()))?;
        Ok((utterance_id, Some(event)))
    }

    /// Stores a 1..=5 star rating for a snippet of an event. A later rating
    /// of the same pair replaces the earlier one.
    pub fn record_rating(
        &mut self,
        event_id: u64,
        snippet_id: &str,
        stars: u8,
    ) -> Result<Rating, SessionError> {
        self.ensure_open()?;
        self.state.check_rating(event_id, snippet_id, stars)?;
        let rating = Rating {
            event_id,
            snippet_id: snippet_id.to_owned(),
            stars,
            rated_at_ms: (self.clock)(),
        };
        self.commit(LogRecord::Rating(rating.clone()))?;
        Ok(rating)
    }

    pub fn resume_summary(&self, top_n: usize) -> RecallSummary {
        self.state.resume_summary(top_n)
    }

    pub fn close(&mut self) -> Result<(), SessionError> {
        self.ensure_open()?;
        let closed_at_ms = (self.clock)();
        self.commit(LogRecord::Close { closed_at_ms })
    }
}
