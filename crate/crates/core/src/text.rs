//! Token normalization and stopwords.
//!
//! Every component (window, index, classifier) tokenizes through
//! [`tokenize`], so an n-gram seen in conversation and one seen in the
//! repository compare equal exactly when their normalized tokens do.

use std::collections::HashSet;
use std::io::BufRead;

/// Lowercases, splits on anything that is not alphanumeric, drops
/// apostrophes inside words (`don't` -> `dont`) and keeps hyphens that sit
/// between two alphanumeric characters (`real-time`).
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
            continue;
        }
        let inner = !current.is_empty()
            && chars
                .get(i + 1)
                .is_some_and(|next| next.is_alphanumeric());
        match c {
            '-' if inner => current.push('-'),
            '\'' | '\u{2019}' if inner => {}
            _ => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// A set of function words, filtered from unigram terms only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// Reads one token per line; blank lines and `#` comments are skipped.
    /// Entries are normalized with [`tokenize`].
    pub fn from_reader<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut set = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            set.extend(tokenize(line));
        }
        Ok(Stopwords(set))
    }

    pub fn none() -> Self {
        Stopwords(HashSet::new())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    /// The bundled English list.
    fn default() -> Self {
        Stopwords::from_reader(DEFAULT_STOPWORDS.as_bytes()).expect("bundled list is valid UTF-8")
    }
}
