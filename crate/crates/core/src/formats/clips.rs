//! Clip lists as JSONL, one [`ClipSample`] per line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_jsonl, read_text, to_jsonl, write_text, FormatError};
use crate::label::ClassLabel;
use crate::sampling::{ClipKind, ClipSample};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClipRecord {
    video_id: String,
    start_frame: u32,
    context_len: u32,
    aw_start: u32,
    aw_len: u32,
    stride: u32,
    label: ClassLabel,
    kind: ClipKind,
}

pub fn parse(text: &str) -> Result<Vec<ClipSample>, FormatError> {
    parse_jsonl::<ClipRecord>(text)?
        .into_iter()
        .map(|(line, r)| {
            if r.stride == 0 {
                return Err(FormatError::line(line, "stride must be positive"));
            }
            Ok(ClipSample {
                video_id: r.video_id,
                start_frame: r.start_frame,
                context_len: r.context_len,
                aw_start: r.aw_start,
                aw_len: r.aw_len,
                stride: r.stride,
                label: r.label,
                kind: r.kind,
            })
        })
        .collect()
}

pub fn render(clips: &[ClipSample]) -> String {
    to_jsonl(clips.iter().map(|c| ClipRecord {
        video_id: c.video_id.clone(),
        start_frame: c.start_frame,
        context_len: c.context_len,
        aw_start: c.aw_start,
        aw_len: c.aw_len,
        stride: c.stride,
        label: c.label,
        kind: c.kind,
    }))
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<ClipSample>, FormatError> {
    parse(&read_text(path.as_ref())?)
}

pub fn write(path: impl AsRef<Path>, clips: &[ClipSample]) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(clips))
}
