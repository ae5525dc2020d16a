//! Labelled training data: UTF-8 CSV with header `label,text`.

use std::io::Read;
use std::path::Path;

use super::{ClassifierError, Example};

pub fn read_examples<R: Read>(input: R) -> Result<Vec<Example>, ClassifierError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header_err = |message: String| ClassifierError::Data { line: 1, message };
    let headers = reader
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["label", "text"] {
        return Err(header_err(format!(
            "expected header `label,text`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ClassifierError::Data {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let label = record[0].trim();
        if label.is_empty() {
            return Err(ClassifierError::Data {
                line,
                message: "empty label".into(),
            });
        }
        out.push(Example::new(label, &record[1]));
    }
    Ok(out)
}

pub fn read_examples_path(path: &Path) -> Result<Vec<Example>, ClassifierError> {
    let file = std::fs::File::open(path).map_err(|source| ClassifierError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_examples(file)
}
