//! Relevant-term extraction from the latest conversation window.
//!
//! The window's n-grams (orders 1..=3) become one acceptor and the indexed
//! repository n-grams another; their intersection is exactly the set of
//! n-grams the conversation shares with the repository. Each survivor is
//! scored
//!
//! ```text
//! score = order * window_count * ln(1 + n_snippets / snippet_df)
//! ```
//!
//! which favours longer matches, repeated mentions and terms that
//! discriminate between snippets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::index::{build_trie, SnippetIndex, INDEX_MAX_ORDER};
use crate::text::{tokenize, Stopwords};
use crate::wfsa::{intersect, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub token_budget: usize,
    pub utterance_budget: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            token_budget: 200,
            utterance_budget: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub max_order: usize,
    pub top_k: usize,
    pub min_df: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            max_order: 3,
            top_k: 25,
            min_df: 1,
        }
    }
}

/// The most recent utterances, tokenized, newest last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowState {
    pub utterance_ids: Vec<u64>,
    pub tokens: Vec<String>,
    pub is_stopword: Vec<bool>,
}

impl WindowState {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

/// Keeps the newest `utterance_budget` utterances, then drops the oldest
/// tokens beyond `token_budget`. An utterance older than the first kept
/// token leaves the window.
pub fn build_window(
    utterances: &[(u64, &str)],
    config: &WindowConfig,
    stopwords: &Stopwords,
) -> WindowState {
    let recent = &utterances[utterances.len().saturating_sub(config.utterance_budget)..];
    let tokenized: Vec<(u64, Vec<String>)> = recent
        .iter()
        .map(|&(id, text)| (id, tokenize(text)))
        .collect();
    let total: usize = tokenized.iter().map(|(_, t)| t.len()).sum();
    let mut drop = total.saturating_sub(config.token_budget);

    let mut window = WindowState::default();
    for (id, tokens) in tokenized {
        if drop > 0 && drop >= tokens.len() {
            drop -= tokens.len();
            continue;
        }
        let kept = &tokens[drop..];
        drop = 0;
        window.utterance_ids.push(id);
        window
            .is_stopword
            .extend(kept.iter().map(|t| stopwords.contains(t)));
        window.tokens.extend_from_slice(kept);
    }
    window
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelevantTerm {
    pub ngram: Vec<String>,
    pub order: usize,
    pub window_count: u64,
    pub snippet_df: u64,
    pub score: f64,
}

impl RelevantTerm {
    pub fn new(ngram: Vec<String>, window_count: u64, snippet_df: u64, n_snippets: usize) -> Self {
        let order = ngram.len();
        RelevantTerm {
            score: association_score(order, window_count, snippet_df, n_snippets),
            ngram,
            order,
            window_count,
            snippet_df,
        }
    }

    pub fn text(&self) -> String {
        self.ngram.join(" ")
    }
}

pub fn association_score(order: usize, window_count: u64, snippet_df: u64, n_snippets: usize) -> f64 {
    order as f64 * window_count as f64 * (1.0 + n_snippets as f64 / snippet_df as f64).ln()
}

/// Score descending, then n-gram text ascending.
pub fn sort_terms(terms: &mut [RelevantTerm]) {
    terms.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.ngram.join(" ").cmp(&b.ngram.join(" ")))
    });
}

/// Counts the window's n-grams of order `1..=max_order`.
pub fn window_ngrams(tokens: &[String], max_order: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    for k in 1..=max_order {
        for gram in tokens.windows(k) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Intersects the window and repository n-gram acceptors and scores the
/// shared n-grams. Returns at most `top_k` terms.
pub fn extract_relevant_terms(
    window: &WindowState,
    index: &SnippetIndex,
    config: &ExtractionConfig,
    stopwords: &Stopwords,
) -> Vec<RelevantTerm> {
    if window.is_empty() || index.n_snippets() == 0 {
        return Vec::new();
    }
    let max_order = config.max_order.clamp(1, INDEX_MAX_ORDER);
    let domain = index.domain_acceptor(config.min_df);
    let symbols = index.symbols();

    // Window grams with a token outside the repository vocabulary cannot be
    // in the intersection, and cannot be spelled in the shared table.
    let counts = window_ngrams(&window.tokens, max_order);
    let total = window.len() as f64;
    let mut entries: Vec<(Vec<u32>, Weight)> = counts
        .iter()
        .filter_map(|(gram, &c)| {
            symbols
                .ids(gram)
                .map(|labels| (labels, Weight::from_prob(c as f64 / total)))
        })
        .collect();
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let window_fsa = build_trie(symbols.clone(), entries);

    let shared = intersect(&window_fsa, &domain).expect("both acceptors are epsilon-free tries");
    let mut terms: Vec<RelevantTerm> = shared
        .enumerate(max_order)
        .into_iter()
        .filter_map(|(labels, _)| {
            let gram: Vec<String> = labels
                .iter()
                .map(|&l| symbols.symbol(l).expect("label from shared table").to_owned())
                .collect();
            if gram.len() == 1 && stopwords.contains(&gram[0]) {
                return None;
            }
            let window_count = counts[gram.as_slice()];
            let df = index.df(&gram) as u64;
            Some(RelevantTerm::new(gram, window_count, df, index.n_snippets()))
        })
        .collect();
    sort_terms(&mut terms);
    terms.truncate(config.top_k);
    terms
}
