//! Simulator oracle file: one [`TruthEvent`] per line.

use std::path::Path;

use super::{parse_jsonl, read_text, to_jsonl, write_text, FormatError};
use crate::sim::TruthEvent;

pub fn parse(text: &str) -> Result<Vec<TruthEvent>, FormatError> {
    Ok(parse_jsonl(text)?.into_iter().map(|(_, t)| t).collect())
}

pub fn render(events: &[TruthEvent]) -> String {
    to_jsonl(events)
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<TruthEvent>, FormatError> {
    parse(&read_text(path.as_ref())?)
}

pub fn write(path: impl AsRef<Path>, events: &[TruthEvent]) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(events))
}
