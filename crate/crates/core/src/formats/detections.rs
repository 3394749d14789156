//! Detection JSONL `{video_id, frame, label, confidence}`. Confidences are
//! written with at least six decimals and otherwise in shortest round-trip
//! form, so reading back is exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{parse_jsonl, read_text, write_text, FormatError};
use crate::postprocess::Detection;

pub fn format_confidence(c: f64) -> String {
    let short = c.to_string();
    let decimals = short.split_once('.').map_or(0, |(_, d)| d.len());
    if decimals >= 6 {
        short
    } else {
        format!("{c:.6}")
    }
}

pub fn parse(text: &str) -> Result<Vec<Detection>, FormatError> {
    parse_jsonl::<Detection>(text)?
        .into_iter()
        .map(|(line, d)| {
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(FormatError::line(line, format!("confidence {} outside [0, 1]", d.confidence)));
            }
            Ok(d)
        })
        .collect()
}

pub fn render(dets: &[Detection]) -> String {
    let mut out = String::new();
    for d in dets {
        let id = serde_json::to_string(&d.video_id).expect("string serializes");
        let _ = writeln!(
            out,
            r#"{{"video_id":{id},"frame":{},"label":"{}","confidence":{}}}"#,
            d.frame,
            d.label,
            format_confidence(d.confidence)
        );
    }
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<Detection>, FormatError> {
    parse(&read_text(path.as_ref())?)
}

pub fn write(path: impl AsRef<Path>, dets: &[Detection]) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(dets))
}
