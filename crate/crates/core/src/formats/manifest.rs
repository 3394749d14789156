//! Manifest JSONL: one video per line,
//! `{"id", "fps", "num_frames", "label"?, "event_frame"?, "flags"?, "provenance"?}`.
//! A line with no label, frame or flags is an unannotated video.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_jsonl, read_text, to_jsonl, write_text, FormatError};
use crate::data::{Annotation, Flags, Manifest, ManifestEntry, Provenance, VideoMeta};
use crate::label::ClassLabel;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub id: String,
    pub fps: u32,
    pub num_frames: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ClassLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_frame: Option<u32>,
    #[serde(default, skip_serializing_if = "Flags::is_empty")]
    pub flags: Flags,
    #[serde(default)]
    pub provenance: Provenance,
}

impl ManifestRecord {
    pub fn from_entry(e: &ManifestEntry) -> Self {
        let ann = e.annotation.as_ref();
        ManifestRecord {
            id: e.meta.id.clone(),
            fps: e.meta.fps,
            num_frames: e.meta.num_frames,
            label: ann.and_then(|a| a.label),
            event_frame: ann.and_then(|a| a.event_frame),
            flags: ann.map(|a| a.flags.clone()).unwrap_or_default(),
            provenance: e.provenance,
        }
    }

    pub fn into_entry(self) -> Result<ManifestEntry, FormatError> {
        let meta = VideoMeta::new(self.id, self.fps, self.num_frames)?;
        let annotation = (self.label.is_some() || self.event_frame.is_some() || !self.flags.is_empty()).then(|| Annotation {
            video_id: meta.id.clone(),
            label: self.label,
            event_frame: self.event_frame,
            flags: self.flags,
        });
        Ok(ManifestEntry { meta, annotation, provenance: self.provenance })
    }
}

pub fn parse(text: &str) -> Result<Manifest, FormatError> {
    let mut manifest = Manifest::default();
    for (line, rec) in parse_jsonl::<ManifestRecord>(text)? {
        let entry = rec.into_entry().map_err(|e| FormatError::line(line, e))?;
        manifest.push(entry).map_err(|e| FormatError::line(line, e))?;
    }
    Ok(manifest)
}

pub fn render(manifest: &Manifest) -> String {
    to_jsonl(manifest.entries().iter().map(ManifestRecord::from_entry))
}

pub fn read(path: impl AsRef<Path>) -> Result<Manifest, FormatError> {
    parse(&read_text(path.as_ref())?)
}

pub fn write(path: impl AsRef<Path>, manifest: &Manifest) -> Result<(), FormatError> {
    write_text(path.as_ref(), &render(manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_videos() {
        let text = r#"{"id":"a","fps":60,"num_frames":600}
{"id":"b","fps":60,"num_frames":600,"label":"OREB","event_frame":12}

{"id":"c","fps":60,"num_frames":600,"flags":["mislabeled"]}
"#;
        let m = parse(text).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.get("a").unwrap().annotation.is_none());
        assert_eq!(m.ground_truths().len(), 1);
        assert!(render(&m).lines().nth(1).unwrap().contains(r#""label":"OREB","event_frame":12,"provenance":"manual""#));
        assert_eq!(parse(&render(&m)).unwrap(), m);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dup = "{\"id\":\"a\",\"fps\":60,\"num_frames\":10}\n{\"id\":\"a\",\"fps\":60,\"num_frames\":10}\n";
        let err = parse(dup).unwrap_err();
        assert!(matches!(err, FormatError::Line { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));
        let range = "{\"id\":\"a\",\"fps\":60,\"num_frames\":600,\"label\":\"DREB\",\"event_frame\":900}";
        assert!(parse(range).unwrap_err().to_string().contains("out of range"));
        assert!(matches!(parse("{\"id\":\"a\",\"fps\":60}\n").unwrap_err(), FormatError::Line { line: 1, .. }));
        assert!(parse("{\"id\":\"a\",\"fps\":60,\"num_frames\":1,\"bogus\":1}").is_err());
    }
}
