//! Per-video class predictions as CSV `video_id,label`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_csv, read_text, to_csv, write_text, FormatError};
use crate::label::ClassLabel;

pub const HEADER: [&str; 2] = ["video_id", "label"];

#[derive(Serialize, Deserialize)]
struct Row {
    video_id: String,
    label: ClassLabel,
}

pub fn parse(text: &str) -> Result<BTreeMap<String, ClassLabel>, FormatError> {
    let mut out = BTreeMap::new();
    for (line, r) in parse_csv::<Row>(text, &HEADER)? {
        if out.insert(r.video_id.clone(), r.label).is_some() {
            return Err(FormatError::line(line, format!("duplicate video id {:?}", r.video_id)));
        }
    }
    Ok(out)
}

pub fn render(preds: &BTreeMap<String, ClassLabel>) -> String {
    to_csv(&HEADER, preds.iter().map(|(k, &v)| Row { video_id: k.clone(), label: v }))
}

pub fn read(path: impl AsRef<Path>) -> Result<BTreeMap<String, ClassLabel>, FormatError> {
    parse(&read_text(path.as_ref())?)
}

pub fn write(path: impl AsRef<Path>, preds: &BTreeMap<String, ClassLabel>) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(preds))
}
