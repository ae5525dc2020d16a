//! Sessions: log-then-replay equality over random operation sequences and
//! identical extraction across two fresh sessions.

use std::io::Write;
use std::sync::{Arc, Mutex};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elicit_core::session::{replay, Clock, IncomingUtterance, Session, SessionConfig};

use crate::common::fixture_pipeline;
use crate::{ensure, Outcome};

#[derive(Clone, Default)]
struct SharedLog(Arc<Mutex<Vec<u8>>>);

impl Write for SharedLog {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

const WORDS: &[&str] = &[
    "payment", "gateway", "refund", "order", "customer", "password", "account", "search",
    "catalogue", "available", "maintenance", "the", "must", "so", "okay", "seconds",
];

fn utterance(rng: &mut ChaCha8Rng, t: &mut u64) -> IncomingUtterance {
    let len = rng.random_range(0..10);
    let text: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
    let start = *t;
    *t += rng.random_range(0..4000);
    IncomingUtterance {
        speaker: format!("S{}", rng.random_range(1..3)),
        t_start_ms: start,
        t_end_ms: *t,
        text: text.join(" "),
        confidence: rng.random_bool(0.5).then(|| rng.random_range(0.0..=1.0)),
    }
}

fn ticking() -> Clock {
    let t = Arc::new(Mutex::new(0u64));
    Arc::new(move || {
        let mut t = t.lock().unwrap();
        *t += 13;
        *t
    })
}

pub fn check() -> Outcome {
    let pipeline = fixture_pipeline();
    let mut ops = 0usize;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let log = SharedLog::default();
        let config = SessionConfig {
            min_tokens: rng.random_range(1..10),
            retrieval_m: rng.random_range(1..6),
            ..Default::default()
        };
        let mut s = Session::create(format!("r{seed}"), config, pipeline.clone(), Some(Box::new(log.clone())), ticking())
            .map_err(|e| e.to_string())?;
        let mut t = 0;
        for _ in 0..rng.random_range(0..40) {
            ops += 1;
            if rng.random_bool(0.7) {
                s.append_utterance(utterance(&mut rng, &mut t)).map_err(|e| e.to_string())?;
            } else {
                let target = s
                    .state()
                    .events
                    .choose(&mut rng)
                    .and_then(|e| e.results.choose(&mut rng).map(|r| (e.event_id, r.snippet_id.clone())));
                let (event_id, snippet_id) = target.unwrap_or((99, "none.md#0".into()));
                // Invalid ratings are rejected without touching the log.
                let _ = s.record_rating(event_id, &snippet_id, rng.random_range(0..=6));
            }
        }
        if rng.random_bool(0.3) {
            s.close().map_err(|e| e.to_string())?;
        }
        let bytes = log.0.lock().unwrap().clone();
        let replayed = replay(bytes.as_slice()).map_err(|e| format!("run {seed}: {e}"))?;
        ensure!(&replayed == s.state(), "run {seed}: replayed state differs");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut t = 0;
    let utterances: Vec<IncomingUtterance> = (0..60).map(|_| utterance(&mut rng, &mut t)).collect();
    let late: Clock = Arc::new(|| 9_000_000);
    let mut a = Session::create("same", SessionConfig::default(), pipeline.clone(), None, ticking())
        .map_err(|e| e.to_string())?;
    let mut b = Session::create("same", SessionConfig::default(), fixture_pipeline(), None, late)
        .map_err(|e| e.to_string())?;
    let mut events = 0;
    for (i, u) in utterances.into_iter().enumerate() {
        let (ia, ea) = a.append_utterance(u.clone()).map_err(|e| e.to_string())?;
        let (ib, eb) = b.append_utterance(u).map_err(|e| e.to_string())?;
        ensure!(ia == ib, "utterance {i}: ids {ia} vs {ib}");
        match (ea, eb) {
            (None, None) => {}
            (Some(mut x), Some(y)) => {
                x.created_at_ms = y.created_at_ms;
                ensure!(x == y, "utterance {i}: events differ");
                events += 1;
            }
            _ => return Err(format!("utterance {i}: only one session extracted")),
        }
    }
    ensure!(events > 0, "no extraction events were produced");
    Ok(format!("100 replay runs ({ops} operations); {events} identical events across two sessions"))
}
