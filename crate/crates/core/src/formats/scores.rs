//! Per-video score tables: header `frame,p_dreb,p_oreb,p_bg`, one row per
//! effective frame. The `frame` column holds original-frame indices
//! (`row * stride`), so the stride is recovered from the spacing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_csv, read_text, to_csv, write_text, FormatError};
use crate::postprocess::ScoreStream;

pub const HEADER: [&str; 4] = ["frame", "p_dreb", "p_oreb", "p_bg"];

#[derive(Serialize, Deserialize)]
struct Row {
    frame: u32,
    p_dreb: f64,
    p_oreb: f64,
    p_bg: f64,
}

/// Parses a score table for `video_id` recorded at `fps`. A single-row
/// table has stride `default_stride`.
pub fn parse(text: &str, video_id: &str, fps: f64, default_stride: u32) -> Result<ScoreStream, FormatError> {
    let rows = parse_csv::<Row>(text, &HEADER)?;
    let stride = match rows.get(1) {
        Some((_, r)) => r.frame,
        None => default_stride,
    };
    if stride == 0 {
        return Err(FormatError::line(3, "frame column must be strictly increasing"));
    }
    let mut scores = Vec::with_capacity(rows.len());
    for (i, (line, r)) in rows.into_iter().enumerate() {
        let expected = u32::try_from(i).ok().and_then(|i| i.checked_mul(stride));
        if expected != Some(r.frame) {
            return Err(FormatError::line(line, format!("frame {} breaks the stride-{stride} grid", r.frame)));
        }
        scores.push([r.p_dreb, r.p_oreb, r.p_bg]);
    }
    ScoreStream::new(video_id, fps, stride, scores).map_err(|e| FormatError::Invalid(format!("{video_id}: {e}")))
}

pub fn render(stream: &ScoreStream) -> String {
    to_csv(
        &HEADER,
        stream.scores().iter().enumerate().map(|(i, s)| Row {
            frame: stream.frame_of_row(i),
            p_dreb: s[0],
            p_oreb: s[1],
            p_bg: s[2],
        }),
    )
}

pub fn read(path: impl AsRef<Path>, video_id: &str, fps: f64, default_stride: u32) -> Result<ScoreStream, FormatError> {
    parse(&read_text(path.as_ref())?, video_id, fps, default_stride)
}

pub fn write(path: impl AsRef<Path>, stream: &ScoreStream) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(stream))
}
