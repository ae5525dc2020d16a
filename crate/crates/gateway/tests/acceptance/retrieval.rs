//! BM25 ranking: a hand-computed score and ranking monotonicity fixtures.

use elicit_core::extract::RelevantTerm;
use elicit_core::index::SnippetIndex;
use elicit_core::text::tokenize;

use crate::{ensure, Outcome};

fn term(text: &str, score: f64) -> RelevantTerm {
    let ngram = tokenize(text);
    RelevantTerm { order: ngram.len(), ngram, window_count: 1, snippet_df: 1, score }
}

fn scores(idx: &SnippetIndex, terms: &[RelevantTerm]) -> Vec<(String, f64)> {
    idx.retrieve(terms, 100)
        .unwrap()
        .into_iter()
        .map(|r| (r.snippet.snippet_id.clone(), r.score))
        .collect()
}

fn score_of(idx: &SnippetIndex, terms: &[RelevantTerm], id: &str) -> f64 {
    scores(idx, terms).into_iter().find(|(s, _)| s == id).map_or(0.0, |(_, v)| v)
}

fn index(docs: &[(&str, &str)]) -> SnippetIndex {
    SnippetIndex::ingest_corpus(docs.iter().copied()).unwrap()
}

pub fn check() -> Outcome {
    // Two snippets: "payment gateway payment" (3 tokens, tf 2) and "refund".
    // N = 2, df = 1, avg_len = 2.
    // idf = ln(1 + (2 - 1 + 0.5) / (1 + 0.5)) = ln 2
    // tf part = 2 * (1.2 + 1) / (2 + 1.2 * (1 - 0.75 + 0.75 * 3 / 2)) = 4.4 / 3.65
    // term weight 2 => 2 * ln 2 * 4.4 / 3.65 = 1.671149...
    let idx = index(&[("a", "payment gateway payment"), ("b", "refund")]);
    let hand = 2.0 * 2f64.ln() * 4.4 / 3.65;
    let got = scores(&idx, &[term("payment", 2.0)]);
    ensure!(got.len() == 1 && got[0].0 == "a#0", "unexpected results {got:?}");
    ensure!((got[0].1 - hand).abs() <= 1e-6, "score {} vs hand value {hand}", got[0].1);

    // More occurrences at equal length rank higher.
    let idx = index(&[("hi", "cache cache miss"), ("lo", "cache miss miss")]);
    let r = scores(&idx, &[term("cache", 1.0)]);
    ensure!(r[0].0 == "hi#0" && r[0].1 > r[1].1, "tf monotonicity: {r:?}");

    // Equal occurrences, longer snippet ranks lower.
    let idx = index(&[("long", "cache entries expire after the configured interval"), ("short", "cache entries")]);
    let r = scores(&idx, &[term("cache", 1.0)]);
    ensure!(r[0].0 == "short#0" && r[0].1 > r[1].1, "length normalization: {r:?}");

    // Rarer terms weigh more than common ones at equal weight and length.
    let idx = index(&[
        ("rare", "audit report"),
        ("common", "user report"),
        ("c2", "user login"),
        ("c3", "user logout"),
    ]);
    let r = scores(&idx, &[term("audit", 1.0), term("user", 1.0)]);
    ensure!(r[0].0 == "rare#0", "idf ordering: {r:?}");

    // Scores scale linearly with term weight.
    let one = score_of(&idx, &[term("audit", 1.0)], "rare#0");
    let three = score_of(&idx, &[term("audit", 3.0)], "rare#0");
    ensure!((three - 3.0 * one).abs() <= 1e-12, "weight scaling: {one} vs {three}");

    // Adding a query term never lowers any snippet's score, and results
    // stay sorted.
    let idx = index(&[
        ("a", "cache cache cache invalidation"),
        ("b", "cache policy for the session store and more words here"),
        ("c", "session timeout"),
        ("d", "invalidation of session cache"),
    ]);
    let mut terms = vec![term("cache", 1.5)];
    let mut previous = scores(&idx, &terms);
    for extra in [term("session", 0.7), term("invalidation", 2.0), term("session cache", 1.0)] {
        terms.push(extra);
        let now = scores(&idx, &terms);
        ensure!(now.windows(2).all(|w| w[0].1 >= w[1].1), "unsorted results {now:?}");
        for (id, before) in &previous {
            let after = now.iter().find(|(s, _)| s == id).map_or(0.0, |x| x.1);
            ensure!(after >= *before, "{id} dropped from {before} to {after}");
        }
        previous = now;
    }
    Ok(format!("hand value {:.7} within 1e-6; 5 monotonicity fixtures", got[0].1))
}
