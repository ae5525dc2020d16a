//! Splitting repository documents into snippets.
//!
//! Paragraphs (runs of non-blank lines) are the unit. A paragraph longer
//! than [`MAX_SNIPPET_CHARS`] is cut at sentence boundaries into chunks of at
//! most [`MAX_SNIPPET_SENTENCES`] sentences and `MAX_SNIPPET_CHARS`
//! characters; a single sentence longer than that stays whole.

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

pub const MAX_SNIPPET_CHARS: usize = 600;
pub const MAX_SNIPPET_SENTENCES: usize = 3;

/// A contiguous fragment of a repository document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snippet {
    pub doc_id: String,
    pub snippet_id: String,
    /// Byte offsets into the source document; `doc[start..end] == text`.
    pub char_span: (usize, usize),
    pub text: String,
    #[serde(skip)]
    pub tokens: Vec<String>,
}

impl Snippet {
    fn new(doc_id: &str, ordinal: usize, doc: &str, span: (usize, usize)) -> Snippet {
        let text = doc[span.0..span.1].to_owned();
        Snippet {
            doc_id: doc_id.to_owned(),
            snippet_id: format!("{doc_id}#{ordinal}"),
            char_span: span,
            tokens: tokenize(&text),
            text,
        }
    }

    /// Token count.
    pub fn length(&self) -> usize {
        self.tokens.len()
    }

    pub(crate) fn retokenize(&mut self) {
        self.tokens = tokenize(&self.text);
    }
}

/// Shrinks `span` to exclude surrounding whitespace.
fn trim_span(doc: &str, (start, end): (usize, usize)) -> (usize, usize) {
    let s = &doc[start..end];
    let lead = s.len() - s.trim_start().len();
    let trail = s.len() - s.trim_end().len();
    if lead == s.len() {
        (start, start)
    } else {
        (start + lead, end - trail)
    }
}

fn paragraphs(doc: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    let mut offset = 0;
    for line in doc.split_inclusive('\n') {
        let end = offset + line.len();
        if line.trim().is_empty() {
            out.extend(current.take());
        } else {
            current = Some(match current {
                Some((s, _)) => (s, end),
                None => (offset, end),
            });
        }
        offset = end;
    }
    out.extend(current);
    out.into_iter()
        .map(|span| trim_span(doc, span))
        .filter(|(s, e)| s < e)
        .collect()
}

/// Sentence spans inside `span`: a sentence ends after `.`, `!` or `?`
/// followed by whitespace, or at the end of the span.
fn sentences(doc: &str, span: (usize, usize)) -> Vec<(usize, usize)> {
    let text = &doc[span.0..span.1];
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?')
            && iter.peek().is_some_and(|&(_, next)| next.is_whitespace())
        {
            let end = i + c.len_utf8();
            out.push((span.0 + start, span.0 + end));
            start = end;
        }
    }
    if start < text.len() {
        out.push((span.0 + start, span.1));
    }
    out.into_iter()
        .map(|s| trim_span(doc, s))
        .filter(|(s, e)| s < e)
        .collect()
}

fn char_len(doc: &str, (s, e): (usize, usize)) -> usize {
    doc[s..e].chars().count()
}

/// Splits a document into snippets. Segments without any token are dropped.
pub fn segment(doc: &str, doc_id: &str) -> Vec<Snippet> {
    let mut spans = Vec::new();
    for para in paragraphs(doc) {
        if char_len(doc, para) <= MAX_SNIPPET_CHARS {
            spans.push(para);
            continue;
        }
        let mut chunk: Option<((usize, usize), usize)> = None;
        for sent in sentences(doc, para) {
            chunk = Some(match chunk {
                Some(((start, _), n))
                    if n < MAX_SNIPPET_SENTENCES
                        && char_len(doc, (start, sent.1)) <= MAX_SNIPPET_CHARS =>
                {
                    ((start, sent.1), n + 1)
                }
                Some((done, _)) => {
                    spans.push(done);
                    (sent, 1)
                }
                None => (sent, 1),
            });
        }
        spans.extend(chunk.map(|(span, _)| span));
    }
    spans
        .into_iter()
        .map(|span| Snippet::new(doc_id, 0, doc, span))
        .filter(|s| s.length() > 0)
        .enumerate()
        .map(|(i, mut s)| {
            s.snippet_id = format!("{doc_id}#{i}");
            s
        })
        .collect()
}
