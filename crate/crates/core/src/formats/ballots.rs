//! Expert ballots as CSV `expert_id,video_id,label`.

use std::path::Path;

use super::{parse_csv, read_text, to_csv, write_text, FormatError};
use crate::panel::Ballot;

pub const HEADER: [&str; 3] = ["expert_id", "video_id", "label"];

pub fn parse(text: &str) -> Result<Vec<Ballot>, FormatError> {
    Ok(parse_csv::<Ballot>(text, &HEADER)?.into_iter().map(|(_, b)| b).collect())
}

pub fn render(ballots: &[Ballot]) -> String {
    to_csv(&HEADER, ballots)
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<Ballot>, FormatError> {
    parse(&read_text(path.as_ref())?)
}

/// Reads and concatenates several ballot files, e.g. one per expert.
pub fn read_all<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<Ballot>, FormatError> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read(p)?);
    }
    Ok(out)
}

pub fn write(path: impl AsRef<Path>, ballots: &[Ballot]) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(ballots))
}
