//! Multi-order n-gram counts with stupid-backoff scoring.
//!
//! A model holds sliding-window counts for every order `1..=max_order`.
//! There is no sentence padding: the inputs are conversation fragments and
//! repository snippets, which may start and end anywhere.
//!
//! Scoring follows stupid backoff:
//!
//! ```text
//! S(w | h) = count(h w) / count(h)      if count(h w) > 0
//!          = alpha * S(w | h')           otherwise, h' = h without its oldest token
//! S(w)     = count(w) / total_tokens    if w was seen
//!          = 1 / (total_tokens + 1)     otherwise
//! ```
//!
//! [`NgramModel::compile_to_wfsa`] builds a backoff acceptor whose tropical
//! shortest path never costs more than [`NgramModel::sequence_nll`], and
//! costs exactly as much when every n-gram of the input was observed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wfsa::{StateId, SymbolTable, Weight, Wfsa, WfsaBuilder};

pub const DEFAULT_MAX_ORDER: usize = 3;
pub const DEFAULT_BACKOFF_ALPHA: f64 = 0.4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NgramError {
    #[error("max_order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("backoff alpha must be in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("cannot compile an empty model")]
    EmptyModel,
    #[error("inconsistent counts: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StoredModel", try_from = "StoredModel")]
pub struct NgramModel {
    max_order: usize,
    /// `counts[k - 1]` holds the order-`k` n-grams.
    counts: Vec<HashMap<Vec<String>, u64>>,
    total_tokens: u64,
    vocab: BTreeSet<String>,
    backoff_alpha: f64,
}

impl NgramModel {
    /// Counts every n-gram of order `1..=max_order` in `tokens`.
    pub fn count_ngrams(tokens: &[String], max_order: usize) -> Result<Self, NgramError> {
        if max_order < 1 {
            return Err(NgramError::InvalidOrder(max_order));
        }
        let mut counts = vec![HashMap::new(); max_order];
        for k in 1..=max_order {
            for gram in tokens.windows(k) {
                *counts[k - 1].entry(gram.to_vec()).or_insert(0) += 1;
            }
        }
        let vocab = tokens.iter().cloned().collect();
        Ok(NgramModel {
            max_order,
            counts,
            total_tokens: tokens.len() as u64,
            vocab,
            backoff_alpha: DEFAULT_BACKOFF_ALPHA,
        })
    }

    pub fn with_backoff_alpha(mut self, alpha: f64) -> Result<Self, NgramError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(NgramError::InvalidAlpha(alpha));
        }
        self.backoff_alpha = alpha;
        Ok(self)
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn backoff_alpha(&self) -> f64 {
        self.backoff_alpha
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    pub fn is_empty(&self) -> bool {
        self.total_tokens == 0
    }

    /// Count of an n-gram; 0 for unseen grams or orders outside the model.
    pub fn count(&self, gram: &[String]) -> u64 {
        match gram.len() {
            0 => self.total_tokens,
            k if k <= self.max_order => self.counts[k - 1].get(gram).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// All n-grams of order `k` with their counts, in no particular order.
    pub fn grams(&self, k: usize) -> impl Iterator<Item = (&[String], u64)> {
        self.counts
            .get(k.wrapping_sub(1))
            .into_iter()
            .flat_map(|m| m.iter().map(|(g, &c)| (g.as_slice(), c)))
    }

    /// Backoff score of `token` after `context`. Only the last
    /// `max_order - 1` context tokens are used.
    pub fn score(&self, token: &str, context: &[String]) -> f64 {
        let keep = context.len().min(self.max_order - 1);
        let mut gram: Vec<String> = context[context.len() - keep..].to_vec();
        gram.push(token.to_owned());
        self.score_gram(&gram)
    }

    /// Score of the last token of `gram` given the tokens before it.
    fn score_gram(&self, gram: &[String]) -> f64 {
        let mut gram = gram;
        let mut factor = 1.0;
        loop {
            let c = self.count(gram);
            if gram.len() == 1 {
                let total = self.total_tokens as f64;
                return if c > 0 {
                    factor * c as f64 / total
                } else {
                    factor / (total + 1.0)
                };
            }
            if c > 0 {
                return factor * c as f64 / self.count(&gram[..gram.len() - 1]) as f64;
            }
            factor *= self.backoff_alpha;
            gram = &gram[1..];
        }
    }

    /// `-sum ln S(t_i | preceding tokens)`, context capped at `max_order - 1`.
    pub fn sequence_nll(&self, tokens: &[String]) -> f64 {
        (0..tokens.len())
            .map(|i| {
                let start = i.saturating_sub(self.max_order - 1);
                -self.score_gram(&tokens[start..=i]).ln()
            })
            .sum()
    }

    /// Checks the count invariants: prefix counts dominate, unigrams sum to
    /// the token total.
    pub fn check_invariants(&self) -> Result<(), NgramError> {
        let unigram_sum: u64 = self.counts[0].values().sum();
        if unigram_sum != self.total_tokens {
            return Err(NgramError::Inconsistent(format!(
                "unigram counts sum to {unigram_sum}, total is {}",
                self.total_tokens
            )));
        }
        for k in 2..=self.max_order {
            for (gram, &c) in &self.counts[k - 1] {
                let prefix = self.count(&gram[..k - 1]);
                if prefix < c {
                    return Err(NgramError::Inconsistent(format!(
                        "{gram:?} has count {c} but its prefix has {prefix}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Compiles the model into a backoff acceptor over a symbol table built
    /// from the sorted vocabulary.
    ///
    /// One state per observed context of order `0..max_order`. A context `h`
    /// has an arc for each observed `h w` with weight `-ln(count(hw)/count(h))`
    /// leading to the state of the last `max_order - 1` tokens of `h w`.
    ///
    /// Backoff from `h` goes through a chain of epsilon arcs of weight
    /// `-ln(alpha)`, one chain state per dropped token. The chain state for
    /// `h'` (h without its oldest `j` tokens) carries arcs only for words seen
    /// after `h'` but not after the next longer context. Follow sets grow as
    /// the context shrinks, so a word observed after `h` can only be read by
    /// the direct arc, and accepting a sequence whose n-grams were all
    /// observed costs exactly [`sequence_nll`](Self::sequence_nll). Every
    /// state is final with weight 0.
    pub fn compile_to_wfsa(&self) -> Result<Wfsa, NgramError> {
        if self.is_empty() {
            return Err(NgramError::EmptyModel);
        }
        let symbols = Arc::new(SymbolTable::from_tokens(&self.vocab));
        let n = self.max_order;

        // Words seen after each context, with counts, in sorted order.
        let mut follow: BTreeMap<&[String], Vec<(&str, u64)>> = BTreeMap::new();
        for k in 1..=n {
            for (gram, &c) in &self.counts[k - 1] {
                follow
                    .entry(&gram[..k - 1])
                    .or_default()
                    .push((gram[k - 1].as_str(), c));
            }
        }
        for words in follow.values_mut() {
            words.sort_unstable();
        }

        // Deterministic numbering: contexts by order then lexicographically,
        // then the backoff chain states in the same order.
        let mut contexts: BTreeMap<(usize, &[String]), StateId> = BTreeMap::new();
        contexts.insert((0, &[][..]), 0);
        for k in 1..n {
            for gram in self.counts[k - 1].keys() {
                contexts.insert((k, gram.as_slice()), 0);
            }
        }
        for (i, id) in contexts.values_mut().enumerate() {
            *id = i as StateId;
        }
        let n_contexts = contexts.len();
        let n_chain: usize = contexts.keys().map(|&(k, _)| k).sum();
        let state = |ctx: &[String]| contexts[&(ctx.len(), ctx)];

        let mut b = WfsaBuilder::with_states(symbols.clone(), n_contexts + n_chain);
        b.set_start(0);
        let err = |e: crate::wfsa::WfsaError| NgramError::Inconsistent(e.to_string());
        for id in 0..(n_contexts + n_chain) {
            b.set_final(id as StateId, Weight::ONE).map_err(err)?;
        }
        let backoff = Weight::from_prob(self.backoff_alpha);
        let no_words: Vec<(&str, u64)> = Vec::new();
        let add_arcs = |b: &mut WfsaBuilder,
                            from: StateId,
                            ctx: &[String],
                            skip: &[(&str, u64)]|
         -> Result<(), NgramError> {
            let total = self.count(ctx) as f64;
            for &(w, c) in follow.get(ctx).unwrap_or(&no_words) {
                if skip.binary_search_by(|&(s, _)| s.cmp(w)).is_ok() {
                    continue;
                }
                let mut gram = ctx.to_vec();
                gram.push(w.to_owned());
                let next = &gram[gram.len().saturating_sub(n - 1)..];
                let label = symbols.id(w).expect("token is in vocab");
                b.add_arc(from, label, Weight::from_prob(c as f64 / total), state(next))
                    .map_err(err)?;
            }
            Ok(())
        };

        let mut chain_id = n_contexts as StateId;
        for (&(k, ctx), &id) in &contexts {
            add_arcs(&mut b, id, ctx, &[])?;
            let mut prev = id;
            for j in 1..=k {
                b.add_epsilon(prev, backoff, chain_id).map_err(err)?;
                let longer = follow.get(&ctx[j - 1..]).unwrap_or(&no_words).clone();
                add_arcs(&mut b, chain_id, &ctx[j..], &longer)?;
                prev = chain_id;
                chain_id += 1;
            }
        }
        b.build().map_err(err)
    }
}

/// Serialized form: sorted `(gram, count)` lists per order.
#[derive(Serialize, Deserialize)]
struct StoredModel {
    max_order: usize,
    backoff_alpha: f64,
    total_tokens: u64,
    counts: Vec<Vec<(Vec<String>, u64)>>,
}

impl From<NgramModel> for StoredModel {
    fn from(m: NgramModel) -> Self {
        let counts = m
            .counts
            .into_iter()
            .map(|order| {
                let mut v: Vec<_> = order.into_iter().collect();
                v.sort();
                v
            })
            .collect();
        StoredModel {
            max_order: m.max_order,
            backoff_alpha: m.backoff_alpha,
            total_tokens: m.total_tokens,
            counts,
        }
    }
}

impl TryFrom<StoredModel> for NgramModel {
    type Error = NgramError;

    fn try_from(s: StoredModel) -> Result<Self, Self::Error> {
        if s.max_order < 1 || s.counts.len() != s.max_order {
            return Err(NgramError::InvalidOrder(s.max_order));
        }
        let counts: Vec<HashMap<Vec<String>, u64>> = s
            .counts
            .into_iter()
            .map(|v| v.into_iter().collect())
            .collect();
        let vocab = counts[0].keys().map(|g| g[0].clone()).collect();
        let model = NgramModel {
            max_order: s.max_order,
            counts,
            total_tokens: s.total_tokens,
            vocab,
            backoff_alpha: DEFAULT_BACKOFF_ALPHA,
        }
        .with_backoff_alpha(s.backoff_alpha)?;
        model.check_invariants()?;
        Ok(model)
    }
}
