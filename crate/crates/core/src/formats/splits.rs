//! Split files: one JSON object `{name, train, val, test, seed, balanced}`.

use std::path::Path;

use super::{read_text, write_text, FormatError};
use crate::data::SplitSet;

pub fn parse(text: &str) -> Result<SplitSet, FormatError> {
    let split: SplitSet = serde_json::from_str(text).map_err(|e| FormatError::line(e.line(), e))?;
    let overlaps = split.overlaps();
    if let Some((a, b, ids)) = overlaps.first() {
        return Err(FormatError::Invalid(format!("split {:?}: {a} and {b} share ids {ids:?}", split.name)));
    }
    Ok(split)
}

pub fn render(split: &SplitSet) -> String {
    let mut s = serde_json::to_string_pretty(split).expect("plain record serializes");
    s.push('\n');
    s
}

pub fn read(path: impl AsRef<Path>) -> Result<SplitSet, FormatError> {
    parse(&read_text(path.as_ref())?)
}

pub fn write(path: impl AsRef<Path>, split: &SplitSet) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(split))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_overlap() {
        let s = SplitSet {
            name: "t".into(),
            train: vec!["a".into()],
            val: vec!["b".into()],
            test: vec!["c".into()],
            seed: 3,
            balanced: false,
        };
        assert_eq!(parse(&render(&s)).unwrap(), s);
        let bad = SplitSet { test: vec!["a".into()], ..s };
        assert!(parse(&render(&bad)).unwrap_err().to_string().contains("share ids"));
    }
}
