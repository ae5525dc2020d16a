//! BM25 ranking with relevance-weighted query terms.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{IndexError, Snippet, SnippetIndex};
use crate::extract::RelevantTerm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedSnippet<'a> {
    pub snippet: &'a Snippet,
    pub score: f64,
}

impl Bm25Params {
    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
    pub fn idf(&self, n_snippets: usize, df: usize) -> f64 {
        let (n, df) = (n_snippets as f64, df as f64);
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn tf_norm(&self, tf: f64, doc_len: f64, avg_len: f64) -> f64 {
        tf * (self.k1 + 1.0) / (tf + self.k1 * (1.0 - self.b + self.b * doc_len / avg_len))
    }
}

impl SnippetIndex {
    /// Top `m` snippets by BM25 with default parameters.
    pub fn retrieve(
        &self,
        terms: &[RelevantTerm],
        m: usize,
    ) -> Result<Vec<RankedSnippet<'_>>, IndexError> {
        self.retrieve_with(terms, m, Bm25Params::default())
    }

    /// Each term contributes `term.score * idf * tf_norm`. Snippets matching
    /// no term are excluded; ties are broken by ascending snippet id.
    pub fn retrieve_with(
        &self,
        terms: &[RelevantTerm],
        m: usize,
        params: Bm25Params,
    ) -> Result<Vec<RankedSnippet<'_>>, IndexError> {
        if m == 0 {
            return Err(IndexError::InvalidArgument(
                "result count m must be at least 1".into(),
            ));
        }
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for term in terms {
            let postings = self.postings(&term.ngram);
            if postings.is_empty() {
                continue;
            }
            let idf = params.idf(self.n_snippets(), postings.len());
            for p in postings {
                let len = self.snippets[p.snippet as usize].length() as f64;
                let contribution = term.score * idf * params.tf_norm(p.tf as f64, len, self.avg_len);
                *scores.entry(p.snippet).or_insert(0.0) += contribution;
            }
        }
        let mut ranked: Vec<RankedSnippet<'_>> = scores
            .into_iter()
            .map(|(i, score)| RankedSnippet {
                snippet: &self.snippets[i as usize],
                score,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.snippet.snippet_id.cmp(&b.snippet.snippet_id))
        });
        ranked.truncate(m);
        Ok(ranked)
    }
}
