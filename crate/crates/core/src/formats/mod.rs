//! Readers and writers for the on-disk artifacts.
//!
//! Line-oriented formats report 1-based line numbers in errors. Every
//! `parse_*` function takes text so it can be fuzzed without touching disk;
//! `read`/`write` wrap them with file I/O.

pub mod ballots;
pub mod clips;
pub mod detections;
pub mod manifest;
pub mod predictions;
pub mod scores;
pub mod splits;
pub mod truth;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::data::DataError;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

impl FormatError {
    pub fn line(line: usize, message: impl ToString) -> Self {
        FormatError::Line { line, message: message.to_string() }
    }

    /// True for malformed content or failed invariants, false for I/O trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(self, FormatError::Io { .. })
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// Parses one JSON value per non-blank line.
pub(crate) fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map(|v| (i + 1, v)).map_err(|e| FormatError::line(i + 1, e)))
        .collect()
}

pub(crate) fn to_jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("plain records serialize"));
        out.push('\n');
    }
    out
}

/// Parses a headed CSV into records, with the header's line counted as 1.
pub(crate) fn parse_csv<T: DeserializeOwned>(text: &str, expected_header: &[&str]) -> Result<Vec<(usize, T)>, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| FormatError::line(1, e))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected_header {
        return Err(FormatError::line(1, format!("expected header {:?}, got {:?}", expected_header.join(","), got.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let rec: T = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            FormatError::line(line, e)
        })?;
        out.push((out.len() + 2, rec));
    }
    Ok(out)
}

pub(crate) fn to_csv<T: Serialize>(header: &[&str], rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
