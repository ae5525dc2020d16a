//! Offline extraction over a written document: the conversation window is
//! slid across the document's sentences as if each were an utterance.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use elicit_core::extract::{build_window, RelevantTerm};
use elicit_core::session::{Pipeline, ScoredSnippet, SessionConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    /// Number of the sentence that closed this window, from 1.
    pub sentence: u64,
    /// Sentences inside the window.
    pub window_sentences: Vec<u64>,
    pub terms: Vec<RelevantTerm>,
    pub results: Vec<ScoredSnippet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSummary {
    pub term: String,
    pub best_score: f64,
    pub windows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnippetSummary {
    pub snippet_id: String,
    pub doc_id: String,
    pub best_score: f64,
    pub label: String,
    pub windows: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OfflineReport {
    pub sentences: usize,
    pub windows: Vec<WindowReport>,
    /// Terms ranked by best score, then text.
    pub terms: Vec<TermSummary>,
    /// Snippets ranked by best score, then id.
    pub snippets: Vec<SnippetSummary>,
}

/// Splits after `.`, `!` or `?` followed by whitespace, and at line breaks.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut start = 0;
        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            let at_end = matches!(c, '.' | '!' | '?')
                && chars.peek().is_none_or(|&(_, n)| n.is_whitespace());
            if at_end {
                let end = i + c.len_utf8();
                out.push(line[start..end].trim());
                start = end;
            }
        }
        out.push(line[start..].trim());
    }
    out.retain(|s| !s.is_empty());
    out
}

pub fn run_offline_extraction(
    pipeline: &Pipeline,
    document: &str,
    config: &SessionConfig,
) -> OfflineReport {
    let sentences = split_sentences(document);
    let numbered: Vec<(u64, &str)> = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| (i as u64 + 1, *s))
        .collect();
    let mut windows = Vec::new();
    for end in 1..=numbered.len() {
        let from = end.saturating_sub(config.window.utterance_budget);
        let window = build_window(&numbered[from..end], &config.window, &pipeline.stopwords);
        if window.len() < config.min_tokens {
            continue;
        }
        let (terms, results) = pipeline.analyze(&window, config);
        windows.push(WindowReport {
            sentence: end as u64,
            window_sentences: window.utterance_ids,
            terms,
            results,
        });
    }

    let mut terms: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut snippets: BTreeMap<String, (f64, String, usize)> = BTreeMap::new();
    for w in &windows {
        for t in &w.terms {
            let e = terms.entry(t.text()).or_insert((f64::NEG_INFINITY, 0));
            e.0 = e.0.max(t.score);
            e.1 += 1;
        }
        for r in &w.results {
            let e = snippets
                .entry(r.snippet_id.clone())
                .or_insert((f64::NEG_INFINITY, String::new(), 0));
            if r.score > e.0 {
                e.0 = r.score;
                e.1 = r.label.clone();
            }
            e.2 += 1;
        }
    }
    let mut terms: Vec<TermSummary> = terms
        .into_iter()
        .map(|(term, (best_score, windows))| TermSummary {
            term,
            best_score,
            windows,
        })
        .collect();
    terms.sort_by(|a, b| b.best_score.total_cmp(&a.best_score).then_with(|| a.term.cmp(&b.term)));
    let mut snippets: Vec<SnippetSummary> = snippets
        .into_iter()
        .map(|(snippet_id, (best_score, label, windows))| SnippetSummary {
            doc_id: pipeline
                .index
                .snippet(&snippet_id)
                .map(|s| s.doc_id.clone())
                .unwrap_or_default(),
            snippet_id,
            best_score,
            label,
            windows,
        })
        .collect();
    snippets.sort_by(|a, b| {
        b.best_score
            .total_cmp(&a.best_score)
            .then_with(|| a.snippet_id.cmp(&b.snippet_id))
    });

    OfflineReport {
        sentences: sentences.len(),
        windows,
        terms,
        snippets,
    }
}

impl OfflineReport {
    /// Machine-readable form; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_summary(&self, pipeline: &Pipeline, top_n: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} sentences, {} windows analysed",
            self.sentences,
            self.windows.len()
        );
        if self.terms.is_empty() {
            let _ = writeln!(out, "no terms shared with the repository");
            return out;
        }
        let _ = writeln!(out, "\nrelevant terms:");
        for t in self.terms.iter().take(top_n) {
            let _ = writeln!(out, "  {:<32} {:>8.3}  ({} windows)", t.term, t.best_score, t.windows);
        }
        let _ = writeln!(out, "\nsnippets:");
        for s in self.snippets.iter().take(top_n) {
            let _ = writeln!(out, "  [{}] {} score {:.3}", s.label, s.snippet_id, s.best_score);
            if let Some(snippet) = pipeline.index.snippet(&s.snippet_id) {
                let text: String = snippet.text.chars().take(160).collect();
                let ellipsis = if snippet.text.chars().count() > 160 { "..." } else { "" };
                let _ = writeln!(out, "      {}{ellipsis}", text.replace('\n', " "));
            }
        }
        out
    }
}
