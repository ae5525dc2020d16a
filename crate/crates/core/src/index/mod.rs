//! The domain repository: segmented snippets plus an n-gram inverted index.

mod bm25;
mod segment;
mod store;

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::wfsa::{SymbolTable, Weight, Wfsa, WfsaBuilder};

pub use bm25::{Bm25Params, RankedSnippet};
pub use segment::{segment, Snippet, MAX_SNIPPET_CHARS, MAX_SNIPPET_SENTENCES};
pub use store::{load_corpus_dir, INDEX_MAGIC};

/// Highest n-gram order held in the postings.
pub const INDEX_MAX_ORDER: usize = 3;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed index file: {0}")]
    Format(String),
    #[error("index checksum mismatch: header says {expected}, content hashes to {actual}")]
    Checksum { expected: String, actual: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Posting {
    /// Position in [`SnippetIndex::snippets`].
    pub snippet: u32,
    pub tf: u32,
}

/// Snippets with postings for every n-gram of order 1..=3.
///
/// Immutable once built. The domain acceptor used for term extraction is
/// derived lazily and memoized per `min_df`.
#[derive(Debug)]
pub struct SnippetIndex {
    snippets: Vec<Snippet>,
    by_id: HashMap<String, u32>,
    postings: HashMap<Vec<String>, Vec<Posting>>,
    avg_len: f64,
    symbols: Arc<SymbolTable>,
    acceptors: Mutex<HashMap<usize, Arc<Wfsa>>>,
}

impl Clone for SnippetIndex {
    fn clone(&self) -> Self {
        SnippetIndex::from_snippets(self.snippets.clone())
    }
}

impl PartialEq for SnippetIndex {
    fn eq(&self, other: &Self) -> bool {
        self.snippets == other.snippets
    }
}

impl SnippetIndex {
    /// Segments and indexes `(doc_id, text)` pairs.
    pub fn ingest_corpus<I, S, T>(docs: I) -> Result<SnippetIndex, IndexError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut snippets = Vec::new();
        for (doc_id, text) in docs {
            let doc_id = doc_id.as_ref();
            if !seen.insert(doc_id.to_owned()) {
                return Err(IndexError::DuplicateDocId(doc_id.to_owned()));
            }
            snippets.extend(segment(text.as_ref(), doc_id));
        }
        Ok(SnippetIndex::from_snippets(snippets))
    }

    pub(crate) fn from_snippets(mut snippets: Vec<Snippet>) -> SnippetIndex {
        let mut postings: HashMap<Vec<String>, Vec<Posting>> = HashMap::new();
        let mut by_id = HashMap::with_capacity(snippets.len());
        let mut vocab = std::collections::BTreeSet::new();
        let mut total_len = 0usize;
        for (i, snippet) in snippets.iter_mut().enumerate() {
            if snippet.tokens.is_empty() {
                snippet.retokenize();
            }
            by_id.insert(snippet.snippet_id.clone(), i as u32);
            total_len += snippet.length();
            let mut tf: HashMap<&[String], u32> = HashMap::new();
            for k in 1..=INDEX_MAX_ORDER {
                for gram in snippet.tokens.windows(k) {
                    *tf.entry(gram).or_insert(0) += 1;
                }
            }
            for (gram, tf) in tf {
                postings.entry(gram.to_vec()).or_default().push(Posting {
                    snippet: i as u32,
                    tf,
                });
            }
            vocab.extend(snippet.tokens.iter().cloned());
        }
        let avg_len = if snippets.is_empty() {
            0.0
        } else {
            total_len as f64 / snippets.len() as f64
        };
        SnippetIndex {
            snippets,
            by_id,
            postings,
            avg_len,
            symbols: Arc::new(SymbolTable::from_tokens(&vocab)),
            acceptors: Mutex::new(HashMap::new()),
        }
    }

    pub fn n_snippets(&self) -> usize {
        self.snippets.len()
    }

    pub fn avg_len(&self) -> f64 {
        self.avg_len
    }

    pub fn snippets(&self) -> &[Snippet] {
        &self.snippets
    }

    pub fn snippet(&self, snippet_id: &str) -> Option<&Snippet> {
        self.by_id.get(snippet_id).map(|&i| &self.snippets[i as usize])
    }

    pub fn postings(&self, gram: &[String]) -> &[Posting] {
        self.postings.get(gram).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of distinct snippets containing `gram`.
    pub fn df(&self, gram: &[String]) -> usize {
        self.postings(gram).len()
    }

    /// Every indexed n-gram with its document frequency.
    pub fn grams(&self) -> impl Iterator<Item = (&[String], usize)> {
        self.postings.iter().map(|(g, p)| (g.as_slice(), p.len()))
    }

    /// Symbol table over the indexed vocabulary, in sorted token order.
    pub fn symbols(&self) -> &Arc<SymbolTable> {
        &self.symbols
    }

    /// An acyclic acceptor with one path per indexed n-gram whose df is at
    /// least `min_df`, weighted `-ln(df / n_snippets)`.
    pub fn domain_acceptor(&self, min_df: usize) -> Arc<Wfsa> {
        let mut cache = self.acceptors.lock().unwrap_or_else(|e| e.into_inner());
        cache
            .entry(min_df)
            .or_insert_with(|| Arc::new(self.build_domain_acceptor(min_df)))
            .clone()
    }

    fn build_domain_acceptor(&self, min_df: usize) -> Wfsa {
        let n = self.n_snippets() as f64;
        let mut grams: Vec<(&[String], usize)> =
            self.grams().filter(|&(_, df)| df >= min_df.max(1)).collect();
        grams.sort_unstable();
        let entries = grams.into_iter().map(|(g, df)| {
            let labels = self.symbols.ids(g).expect("indexed tokens are in the table");
            (labels, Weight::from_prob(df as f64 / n))
        });
        build_trie(self.symbols.clone(), entries)
    }
}

/// Builds an acceptor with one path per entry, sharing common prefixes.
/// Entries must be distinct.
pub(crate) fn build_trie<I>(symbols: Arc<SymbolTable>, entries: I) -> Wfsa
where
    I: IntoIterator<Item = (Vec<u32>, Weight)>,
{
    let mut b = WfsaBuilder::new(symbols);
    let root = b.add_state();
    b.set_start(root);
    let mut children: HashMap<(u32, u32), u32> = HashMap::new();
    for (labels, weight) in entries {
        let mut state = root;
        for &label in &labels {
            state = match children.get(&(state, label)) {
                Some(&next) => next,
                None => {
                    let next = b.add_state();
                    b.add_arc(state, label, Weight::ONE, next)
                        .expect("labels come from the shared table");
                    children.insert((state, label), next);
                    next
                }
            };
        }
        b.set_final(state, weight).expect("non-negative finite weight");
    }
    b.build().expect("root is the start state")
}
