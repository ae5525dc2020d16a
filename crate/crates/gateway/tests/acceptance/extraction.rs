//! Term extraction through acceptor intersection against direct n-gram
//! enumeration with an independent document-frequency count.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use elicit_core::extract::{build_window, extract_relevant_terms, ExtractionConfig, WindowConfig};
use elicit_core::index::SnippetIndex;
use elicit_core::text::{tokenize, Stopwords};

use crate::{ensure, Outcome};

const VOCAB: &[&str] = &[
    "the", "a", "of", "and", "payment", "gateway", "timeout", "refund", "user", "login",
    "report", "audit", "cache", "session", "export", "invoice", "search",
];

fn sentence(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| *VOCAB.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn oracle(tokens: &[String], index: &SnippetIndex, config: &ExtractionConfig, stop: &Stopwords) -> Vec<(String, f64)> {
    let n = index.n_snippets() as f64;
    let mut df: HashMap<Vec<String>, usize> = HashMap::new();
    for s in index.snippets() {
        let toks = tokenize(&s.text);
        let seen: HashSet<Vec<String>> = (1..=3).flat_map(|k| toks.windows(k).map(<[String]>::to_vec)).collect();
        for g in seen {
            *df.entry(g).or_default() += 1;
        }
    }
    let mut counts: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for k in 1..=config.max_order {
        for g in tokens.windows(k) {
            *counts.entry(g.to_vec()).or_default() += 1;
        }
    }
    let mut out: Vec<(String, f64)> = counts
        .into_iter()
        .filter_map(|(g, c)| {
            let d = *df.get(&g)?;
            if d < config.min_df || (g.len() == 1 && stop.contains(&g[0])) {
                return None;
            }
            Some((g.join(" "), g.len() as f64 * c as f64 * (1.0 + n / d as f64).ln()))
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(config.top_k);
    out
}

pub fn check() -> Outcome {
    let stop = Stopwords::default();
    let mut terms_checked = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        let docs: Vec<(String, String)> = (0..rng.random_range(1..6))
            .map(|d| {
                let paras: Vec<String> = (0..rng.random_range(1..4))
                    .map(|_| {
                        let len = rng.random_range(1..15);
                        sentence(&mut rng, len)
                    })
                    .collect();
                (format!("doc{d}.md"), paras.join("\n\n"))
            })
            .collect();
        let index = SnippetIndex::ingest_corpus(docs).map_err(|e| e.to_string())?;
        let texts: Vec<String> = (0..rng.random_range(1..8))
            .map(|_| {
                let len = rng.random_range(0..20);
                sentence(&mut rng, len)
            })
            .collect();
        let utts: Vec<(u64, &str)> = texts.iter().enumerate().map(|(i, t)| (i as u64 + 1, t.as_str())).collect();
        let window_config = WindowConfig {
            token_budget: rng.random_range(5..60),
            utterance_budget: rng.random_range(1..6),
        };
        let window = build_window(&utts, &window_config, &stop);
        let config = ExtractionConfig {
            max_order: rng.random_range(1..=3),
            top_k: if rng.random_bool(0.5) { 10_000 } else { rng.random_range(1..8) },
            min_df: rng.random_range(1..=2),
        };
        let got = extract_relevant_terms(&window, &index, &config, &stop);
        let want = oracle(&window.tokens, &index, &config, &stop);
        ensure!(got.len() == want.len(), "fixture {seed}: {} terms, oracle {}", got.len(), want.len());
        for (g, (text, score)) in got.iter().zip(&want) {
            ensure!(&g.text() == text, "fixture {seed}: term {:?} vs {text:?}", g.text());
            ensure!((g.score - score).abs() <= 1e-9, "fixture {seed}: {text} scored {} vs {score}", g.score);
        }
        terms_checked += got.len();
    }
    Ok(format!("50 fixtures, {terms_checked} terms matched"))
}
