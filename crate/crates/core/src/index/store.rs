//! Index files and corpus directories.
//!
//! An index file is a header line `ELIDX1 <sha256 of body>` followed by a
//! JSON body holding the snippets. Postings are rebuilt on load.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use super::{IndexError, Snippet, SnippetIndex, INDEX_MAX_ORDER};

pub const INDEX_MAGIC: &str = "ELIDX1";

#[derive(Serialize, Deserialize)]
struct IndexBody {
    max_order: usize,
    snippets: Vec<Snippet>,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> IndexError + '_ {
    move |source| IndexError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl SnippetIndex {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let body = serde_json::to_vec(&IndexBody {
            max_order: INDEX_MAX_ORDER,
            snippets: self.snippets.clone(),
        })?;
        let digest = hex::encode(Sha256::digest(&body));
        writeln!(out, "{INDEX_MAGIC} {digest}")?;
        out.write_all(&body)?;
        out.write_all(b"\n")
    }

    pub fn read_from<R: Read>(input: R) -> Result<SnippetIndex, IndexError> {
        Self::read_verified(input).map(|(index, _)| index)
    }

    /// Also returns the verified body digest, a stable content id.
    pub fn read_verified<R: Read>(input: R) -> Result<(SnippetIndex, String), IndexError> {
        let mut reader = BufReader::new(input);
        let mut header = String::new();
        reader
            .read_line(&mut header)
            .map_err(|e| IndexError::Format(e.to_string()))?;
        let expected = match header.trim_end().split_once(' ') {
            Some((INDEX_MAGIC, digest)) => digest.to_owned(),
            _ => {
                return Err(IndexError::Format(format!(
                    "expected {INDEX_MAGIC} header, found {:?}",
                    header.trim_end()
                )))
            }
        };
        let mut body = Vec::new();
        reader
            .read_to_end(&mut body)
            .map_err(|e| IndexError::Format(e.to_string()))?;
        if body.last() == Some(&b'\n') {
            body.pop();
        }
        let actual = hex::encode(Sha256::digest(&body));
        if actual != expected {
            return Err(IndexError::Checksum { expected, actual });
        }
        let body: IndexBody =
            serde_json::from_slice(&body).map_err(|e| IndexError::Format(e.to_string()))?;
        if body.max_order != INDEX_MAX_ORDER {
            return Err(IndexError::Format(format!(
                "unsupported n-gram order {}",
                body.max_order
            )));
        }
        Ok((SnippetIndex::from_snippets(body.snippets), actual))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let file = fs::File::create(path).map_err(io_err(path))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_to(&mut out).map_err(io_err(path))?;
        out.flush().map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<SnippetIndex, IndexError> {
        Self::load_verified(path).map(|(index, _)| index)
    }

    pub fn load_verified(path: &Path) -> Result<(SnippetIndex, String), IndexError> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        SnippetIndex::read_verified(file)
    }
}

/// Reads every `.txt` and `.md` file under `dir`, recursively. Document ids
/// are `/`-separated paths relative to `dir`, returned in sorted order.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<(String, String)>, IndexError> {
    let mut docs = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| IndexError::Io {
            path: dir.display().to_string(),
            source: e.into(),
        })?;
        let path = entry.path();
        let is_text = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e == "txt" || e == "md");
        if !entry.file_type().is_file() || !is_text {
            continue;
        }
        let rel = path.strip_prefix(dir).expect("walkdir yields children of dir");
        let doc_id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        docs.push((doc_id, text));
    }
    docs.sort();
    Ok(docs)
}
