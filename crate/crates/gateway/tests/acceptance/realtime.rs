//! End-to-end append latency on a 1,000-snippet repository with a 200-token
//! window, measured by the replay harness over a 200-utterance transcript.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elicit_core::classify::{train, Example, TrainConfig, DEFAULT_LABELS};
use elicit_core::index::SnippetIndex;
use elicit_core::session::{system_clock, IncomingUtterance, Pipeline, SessionConfig};
use elicit_gateway::harness::{replay_transcript, LatencyStats};
use elicit_gateway::{router, AppState};

use crate::{ensure, Outcome};

const SNIPPETS: usize = 1_000;
const UTTERANCES: usize = 200;

const DOMAIN: &[&str] = &[
    "payment", "gateway", "refund", "order", "customer", "account", "password", "login",
    "catalogue", "search", "checkout", "card", "token", "audit", "log", "available",
    "maintenance", "response", "seconds", "report", "export", "invoice", "shipping", "address",
    "cart", "discount", "stock", "warehouse", "email", "notification", "backup", "restore",
    "latency", "throughput", "encryption", "session", "timeout", "page", "mobile", "browser",
];
const FUNCTION: &[&str] = &[
    "the", "a", "of", "to", "and", "is", "must", "be", "in", "for", "when", "with", "that",
    "it", "we", "should", "on", "within", "every", "can",
];

/// Content words are Zipf-like: low ids are common.
struct Vocab {
    filler: Vec<String>,
}

impl Vocab {
    fn new() -> Self {
        Vocab {
            filler: (0..3_000).map(|i| format!("term{i}")).collect(),
        }
    }

    fn word<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a str {
        match rng.random_range(0..10) {
            0..=3 => FUNCTION.choose(rng).unwrap(),
            4..=6 => DOMAIN.choose(rng).unwrap(),
            _ => {
                let u: f64 = rng.random_range(0.0..1.0);
                let i = ((self.filler.len() as f64).powf(u) - 1.0) as usize;
                &self.filler[i.min(self.filler.len() - 1)]
            }
        }
    }

    fn sentence(&self, rng: &mut ChaCha8Rng, len: usize) -> String {
        (0..len).map(|_| self.word(rng)).collect::<Vec<_>>().join(" ")
    }
}

fn corpus(rng: &mut ChaCha8Rng, vocab: &Vocab) -> Vec<(String, String)> {
    // 100 documents of 10 paragraphs; each paragraph is one snippet.
    (0..SNIPPETS / 10)
        .map(|d| {
            let paras: Vec<String> = (0..10)
                .map(|_| {
                    let (a, b) = (rng.random_range(8..16), rng.random_range(8..16));
                    format!("{}. {}.", vocab.sentence(rng, a), vocab.sentence(rng, b))
                })
                .collect();
            (format!("repo/doc{d:03}.md"), paras.join("\n\n"))
        })
        .collect()
}

fn training_set(rng: &mut ChaCha8Rng, vocab: &Vocab) -> Vec<Example> {
    (0..300)
        .map(|i| {
            let label = DEFAULT_LABELS[i % DEFAULT_LABELS.len()];
            let cue = DOMAIN[(i % DEFAULT_LABELS.len()) * 6 + rng.random_range(0..6)];
            let len = rng.random_range(6..14);
            Example::new(label, format!("{cue} {} {cue}", vocab.sentence(rng, len)))
        })
        .collect()
}

fn transcript(rng: &mut ChaCha8Rng, vocab: &Vocab) -> Vec<IncomingUtterance> {
    let mut t = 0;
    (0..UTTERANCES)
        .map(|i| {
            let len = rng.random_range(20..31);
            let start = t;
            t += 2_000 + rng.random_range(0..3_000);
            IncomingUtterance {
                speaker: if i % 2 == 0 { "Analyst".into() } else { "Client".into() },
                t_start_ms: start,
                t_end_ms: t - 200,
                text: vocab.sentence(rng, len),
                confidence: Some(0.9),
            }
        })
        .collect()
}

pub fn check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let vocab = Vocab::new();
    let index = SnippetIndex::ingest_corpus(corpus(&mut rng, &vocab)).map_err(|e| e.to_string())?;
    ensure!(index.n_snippets() == SNIPPETS, "corpus has {} snippets", index.n_snippets());
    let model = train(&training_set(&mut rng, &vocab), &TrainConfig::default().with_default_labels())
        .map_err(|e| e.to_string())?;
    let pipeline = Arc::new(Pipeline::new(Arc::new(index), Arc::new(model)));
    let utterances = transcript(&mut rng, &vocab);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = SessionConfig::default();
    ensure!(config.window.token_budget == 200, "window budget is {}", config.window.token_budget);
    let state = AppState::with_log_dir(pipeline.clone(), config, system_clock(), dir.path())
        .map_err(|e| e.to_string())?;
    let app = router(state);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let outcome = runtime
        .block_on(replay_transcript(&app, &utterances, 0.0))
        .map_err(|e| e.to_string())?;
    ensure!(outcome.utterances == UTTERANCES, "only {} utterances sent", outcome.utterances);
    ensure!(outcome.events == UTTERANCES, "only {} of {UTTERANCES} utterances triggered extraction", outcome.events);

    // The log holds every event; late windows are full.
    let log = elicit_core::session::replay_path(&dir.path().join(format!("{}.jsonl", outcome.session_id)))
        .map_err(|e| e.to_string())?;
    let last = log.events.last().ok_or("no events logged")?;
    let window_tokens: usize = last
        .window_utterance_ids
        .iter()
        .map(|id| elicit_core::text::tokenize(&log.utterances[*id as usize - 1].text).len())
        .sum();
    ensure!(window_tokens >= 200, "last window spans only {window_tokens} tokens");
    ensure!(!last.results.is_empty(), "last event retrieved nothing");

    let stats = LatencyStats::from_durations(&outcome.latencies);
    let summary = format!(
        "{} snippets, median {:.2} ms, p99 {:.2} ms, max {:.2} ms over {} appends",
        SNIPPETS, stats.median_ms, stats.p99_ms, stats.max_ms, stats.count
    );
    ensure!(stats.median_ms < 100.0 && stats.p99_ms < 250.0, "too slow: {summary}");
    Ok(summary)
}
