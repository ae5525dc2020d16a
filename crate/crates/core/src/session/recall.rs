//! Session-wide summaries for picking a conversation back up.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SessionState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallTerm {
    pub term: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallSnippet {
    pub snippet_id: String,
    pub score: f64,
    /// Label from the most recent event that retrieved the snippet.
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_stars: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecallSummary {
    pub terms: Vec<RecallTerm>,
    pub snippets: Vec<RecallSnippet>,
}

impl SessionState {
    /// Top terms and snippets over the whole session.
    ///
    /// An event `age` events older than the newest contributes with weight
    /// `recency_decay^age`. Terms are ranked by their weighted score sum;
    /// snippets by their weighted retrieval score sum plus `rating_bonus`
    /// times their mean star rating, when rated.
    pub fn resume_summary(&self, top_n: usize) -> RecallSummary {
        let cfg = self.config();
        let newest = self.events.len();
        let mut terms: BTreeMap<String, f64> = BTreeMap::new();
        let mut snippets: BTreeMap<&str, (f64, &str)> = BTreeMap::new();
        for (i, event) in self.events.iter().enumerate() {
            let w = cfg.recency_decay.powi((newest - 1 - i) as i32);
            for t in &event.terms {
                *terms.entry(t.text()).or_insert(0.0) += w * t.score;
            }
            for r in &event.results {
                let entry = snippets.entry(&r.snippet_id).or_insert((0.0, ""));
                entry.0 += w * r.score;
                entry.1 = &r.label;
            }
        }

        let mut stars: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
        for ((_, snippet_id), rating) in &self.ratings {
            let s = stars.entry(snippet_id).or_insert((0, 0));
            s.0 += rating.stars as u32;
            s.1 += 1;
        }

        let mut terms: Vec<RecallTerm> = terms
            .into_iter()
            .map(|(term, score)| RecallTerm { term, score })
            .collect();
        terms.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
        terms.truncate(top_n);

        let mut snippets: Vec<RecallSnippet> = snippets
            .into_iter()
            .map(|(id, (score, label))| {
                let mean_stars = stars.get(id).map(|&(sum, n)| sum as f64 / n as f64);
                RecallSnippet {
                    snippet_id: id.to_owned(),
                    score: score + mean_stars.map_or(0.0, |m| cfg.rating_bonus * m),
                    label: label.to_owned(),
                    mean_stars,
                }
            })
            .collect();
        snippets.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.snippet_id.cmp(&b.snippet_id))
        });
        snippets.truncate(top_n);

        RecallSummary { terms, snippets }
    }
}
