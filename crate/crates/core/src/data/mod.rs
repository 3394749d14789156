//! Dataset manifest, annotations and split management.
//!
//! A [`Manifest`] is immutable once built. Mislabeled videos stay in it with
//! a flag and are excluded only when splits are drawn, so the audit trail of
//! what was removed survives.

mod split;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::label::ClassLabel;

pub use split::{check_disjoint, make_splits, set_difference, SplitSet, SplitSizes};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("video {id:?}: {reason}")]
    InvalidVideo { id: String, reason: String },
    #[error("duplicate video id {0:?}")]
    DuplicateId(String),
    #[error("annotation references unknown video {0:?}")]
    UnknownVideo(String),
    #[error("video {id:?}: event_frame {frame} out of range for {num_frames} frames")]
    EventFrameOutOfRange { id: String, frame: u32, num_frames: u32 },
    #[error("video {id:?}: {reason}")]
    InvalidAnnotation { id: String, reason: String },
    #[error("insufficient samples: requested {requested}, available {available}")]
    InsufficientSamples { requested: usize, available: usize },
    #[error("insufficient {class} samples for {split} split: requested {requested}, available {available}")]
    InsufficientClass {
        split: &'static str,
        class: ClassLabel,
        requested: usize,
        available: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub id: String,
    pub fps: u32,
    pub num_frames: u32,
}

impl VideoMeta {
    pub fn new(id: impl Into<String>, fps: u32, num_frames: u32) -> Result<Self, DataError> {
        let id = id.into();
        if id.is_empty() {
            return Err(DataError::InvalidVideo { id, reason: "empty id".into() });
        }
        if fps == 0 {
            return Err(DataError::InvalidVideo { id, reason: "fps must be positive".into() });
        }
        if num_frames == 0 {
            return Err(DataError::InvalidVideo { id, reason: "num_frames must be positive".into() });
        }
        Ok(VideoMeta { id, fps, num_frames })
    }

    pub fn duration_s(&self) -> f64 {
        f64::from(self.num_frames) / f64::from(self.fps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Occluded,
    BlockedShot,
    Mislabeled,
}

pub type Flags = BTreeSet<Flag>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Manual,
    Pseudo,
}

/// Per-video annotation.
///
/// Three shapes are legal: complete (label and event frame), class-only
/// (label without a timestamp, as delivered by the scrape), and mislabeled
/// (flag set; label and frame optional).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub video_id: String,
    pub label: Option<ClassLabel>,
    pub event_frame: Option<u32>,
    #[serde(default)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnotationStatus {
    Valid,
    ClassOnly,
    Excluded,
}

impl Annotation {
    pub fn new(video_id: impl Into<String>, label: ClassLabel, event_frame: u32) -> Self {
        Annotation {
            video_id: video_id.into(),
            label: Some(label),
            event_frame: Some(event_frame),
            flags: Flags::new(),
        }
    }

    pub fn with_flag(mut self, flag: Flag) -> Self {
        self.flags.insert(flag);
        self
    }

    pub fn is_mislabeled(&self) -> bool {
        self.flags.contains(&Flag::Mislabeled)
    }

    pub fn status(&self) -> AnnotationStatus {
        if self.is_mislabeled() {
            AnnotationStatus::Excluded
        } else if self.event_frame.is_some() {
            AnnotationStatus::Valid
        } else {
            AnnotationStatus::ClassOnly
        }
    }

    /// The timestamped event, if this annotation is usable as ground truth.
    pub fn ground_truth(&self) -> Option<GroundTruth> {
        match (self.status(), self.label, self.event_frame) {
            (AnnotationStatus::Valid, Some(label), Some(frame)) => Some(GroundTruth {
                video_id: self.video_id.clone(),
                label,
                frame,
            }),
            _ => None,
        }
    }

    /// Checks the annotation against its video.
    pub fn check(&self, meta: &VideoMeta) -> Result<(), DataError> {
        let invalid = |reason: &str| DataError::InvalidAnnotation {
            id: self.video_id.clone(),
            reason: reason.to_string(),
        };
        if self.video_id != meta.id {
            return Err(DataError::UnknownVideo(self.video_id.clone()));
        }
        if self.label == Some(ClassLabel::Background) {
            return Err(invalid("annotations carry OREB or DREB only"));
        }
        if let Some(frame) = self.event_frame {
            if frame >= meta.num_frames {
                return Err(DataError::EventFrameOutOfRange {
                    id: meta.id.clone(),
                    frame,
                    num_frames: meta.num_frames,
                });
            }
        }
        if !self.is_mislabeled() && self.event_frame.is_some() && self.label.is_none() {
            return Err(invalid("event_frame without label"));
        }
        if !self.is_mislabeled() && self.label.is_none() && self.event_frame.is_none() {
            return Err(invalid("annotation carries neither label nor event_frame"));
        }
        Ok(())
    }
}

/// A timestamped rebound used for sampling and evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub video_id: String,
    pub label: ClassLabel,
    pub frame: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub meta: VideoMeta,
    pub annotation: Option<Annotation>,
    pub provenance: Provenance,
}

impl ManifestEntry {
    pub fn new(meta: VideoMeta) -> Self {
        ManifestEntry { meta, annotation: None, provenance: Provenance::Manual }
    }

    pub fn annotated(meta: VideoMeta, label: ClassLabel, event_frame: u32) -> Self {
        let annotation = Annotation::new(meta.id.clone(), label, event_frame);
        ManifestEntry { meta, annotation: Some(annotation), provenance: Provenance::Manual }
    }

    pub fn ground_truth(&self) -> Option<GroundTruth> {
        self.annotation.as_ref().and_then(Annotation::ground_truth)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
    index: HashMap<String, usize>,
}

impl Manifest {
    pub fn new(entries: impl IntoIterator<Item = ManifestEntry>) -> Result<Self, DataError> {
        let mut manifest = Manifest::default();
        for entry in entries {
            manifest.push(entry)?;
        }
        Ok(manifest)
    }

    /// Appends one entry, checking id uniqueness and annotation consistency.
    pub fn push(&mut self, entry: ManifestEntry) -> Result<(), DataError> {
        if self.index.contains_key(&entry.meta.id) {
            return Err(DataError::DuplicateId(entry.meta.id));
        }
        if let Some(ann) = &entry.annotation {
            ann.check(&entry.meta)?;
        }
        self.index.insert(entry.meta.id.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn videos(&self) -> impl Iterator<Item = &VideoMeta> {
        self.entries.iter().map(|e| &e.meta)
    }

    /// Timestamped, non-excluded annotations in manifest order.
    pub fn ground_truths(&self) -> Vec<GroundTruth> {
        self.entries.iter().filter_map(ManifestEntry::ground_truth).collect()
    }

    /// Returns a copy with `annotation` replacing the video's current one.
    pub fn with_annotation(&self, annotation: Annotation) -> Result<Manifest, DataError> {
        let &i = self
            .index
            .get(&annotation.video_id)
            .ok_or_else(|| DataError::UnknownVideo(annotation.video_id.clone()))?;
        annotation.check(&self.entries[i].meta)?;
        let mut out = self.clone();
        out.entries[i].annotation = Some(annotation);
        Ok(out)
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest, crate::formats::FormatError> {
    crate::formats::manifest::read(path)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub dreb: usize,
    pub oreb: usize,
}

impl ClassCounts {
    pub fn add(&mut self, label: ClassLabel) {
        match label {
            ClassLabel::Dreb => self.dreb += 1,
            ClassLabel::Oreb => self.oreb += 1,
            ClassLabel::Background => {}
        }
    }

    pub fn get(&self, label: ClassLabel) -> usize {
        match label {
            ClassLabel::Dreb => self.dreb,
            ClassLabel::Oreb => self.oreb,
            ClassLabel::Background => 0,
        }
    }

    pub fn total(&self) -> usize {
        self.dreb + self.oreb
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Every video in the manifest, including excluded ones.
    pub nominal: usize,
    pub valid: usize,
    /// Mislabeled videos, to be excluded from every split.
    pub excluded: Vec<String>,
    /// Videos without a timestamped annotation (none at all, or class-only).
    pub unannotated: Vec<String>,
    pub class_counts: ClassCounts,
}

pub fn validate_annotations(manifest: &Manifest) -> ValidationReport {
    let mut report = ValidationReport { nominal: manifest.len(), ..Default::default() };
    for entry in manifest.entries() {
        let status = entry.annotation.as_ref().map(Annotation::status);
        match status {
            Some(AnnotationStatus::Excluded) => report.excluded.push(entry.meta.id.clone()),
            Some(AnnotationStatus::Valid) => {
                report.valid += 1;
                if let Some(gt) = entry.ground_truth() {
                    report.class_counts.add(gt.label);
                }
            }
            Some(AnnotationStatus::ClassOnly) | None => report.unannotated.push(entry.meta.id.clone()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str, frames: u32) -> VideoMeta {
        VideoMeta::new(id, 60, frames).unwrap()
    }

    #[test]
    fn video_meta_rejects_degenerate_geometry() {
        assert!(VideoMeta::new("a", 0, 10).is_err());
        assert!(VideoMeta::new("a", 60, 0).is_err());
        assert!(VideoMeta::new("", 60, 10).is_err());
        let v = meta("a", 600);
        assert!((v.duration_s() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Manifest::new([ManifestEntry::new(meta("a", 10)), ManifestEntry::new(meta("a", 20))])
            .unwrap_err();
        assert!(matches!(err, DataError::DuplicateId(id) if id == "a"));
    }

    #[test]
    fn event_frame_must_lie_inside_video() {
        let err = Manifest::new([ManifestEntry::annotated(meta("a", 600), ClassLabel::Oreb, 900)]).unwrap_err();
        assert!(matches!(err, DataError::EventFrameOutOfRange { frame: 900, .. }));
        assert!(Manifest::new([ManifestEntry::annotated(meta("a", 600), ClassLabel::Oreb, 599)]).is_ok());
    }

    #[test]
    fn background_annotation_rejected() {
        let err = Manifest::new([ManifestEntry::annotated(meta("a", 600), ClassLabel::Background, 10)]).unwrap_err();
        assert!(matches!(err, DataError::InvalidAnnotation { .. }));
    }

    #[test]
    fn mislabeled_needs_neither_label_nor_frame() {
        let mut e = ManifestEntry::new(meta("a", 600));
        e.annotation = Some(Annotation {
            video_id: "a".into(),
            label: None,
            event_frame: None,
            flags: [Flag::Mislabeled].into_iter().collect(),
        });
        let m = Manifest::new([e]).unwrap();
        assert_eq!(m.get("a").unwrap().annotation.as_ref().unwrap().status(), AnnotationStatus::Excluded);
        assert!(m.ground_truths().is_empty());
    }

    #[test]
    fn frame_without_label_rejected() {
        let mut e = ManifestEntry::new(meta("a", 600));
        e.annotation = Some(Annotation { video_id: "a".into(), label: None, event_frame: Some(3), flags: Flags::new() });
        assert!(Manifest::new([e]).is_err());
    }

    #[test]
    fn validation_counts_ten_with_three_flagged() {
        let entries = (0..10).map(|i| {
            let label = if i % 2 == 0 { ClassLabel::Dreb } else { ClassLabel::Oreb };
            let mut e = ManifestEntry::annotated(meta(&format!("v{i}"), 600), label, 100);
            if i < 3 {
                e.annotation = e.annotation.map(|a| a.with_flag(Flag::Mislabeled));
            }
            e
        });
        let report = validate_annotations(&Manifest::new(entries).unwrap());
        assert_eq!(report.valid, 7);
        assert_eq!(report.excluded, vec!["v0", "v1", "v2"]);
        assert_eq!(report.class_counts, ClassCounts { dreb: 3, oreb: 4 });
        assert_eq!(report.valid + report.excluded.len() + report.unannotated.len(), report.nominal);
    }

    #[test]
    fn validation_of_2000_with_84_flagged_leaves_1916() {
        let entries = (0..2000).map(|i| {
            let label = if i % 2 == 0 { ClassLabel::Dreb } else { ClassLabel::Oreb };
            let mut e = ManifestEntry::annotated(meta(&format!("v{i:04}"), 600), label, 300);
            if i % 23 == 0 && i / 23 < 84 {
                e.annotation = e.annotation.map(|a| a.with_flag(Flag::Mislabeled));
            }
            e
        });
        let report = validate_annotations(&Manifest::new(entries).unwrap());
        assert_eq!(report.excluded.len(), 84);
        assert_eq!(report.valid, 1916);
        assert_eq!(report.nominal, 2000);
    }

    #[test]
    fn validation_of_unannotated_manifest_is_empty() {
        let m = Manifest::new((0..4).map(|i| ManifestEntry::new(meta(&format!("v{i}"), 10)))).unwrap();
        let report = validate_annotations(&m);
        assert_eq!(report.valid, 0);
        assert!(report.excluded.is_empty());
        assert_eq!(report.class_counts, ClassCounts::default());
        assert_eq!(report.unannotated.len(), 4);
    }

    #[test]
    fn with_annotation_replaces_and_validates() {
        let m = Manifest::new([ManifestEntry::new(meta("a", 100))]).unwrap();
        let m2 = m.with_annotation(Annotation::new("a", ClassLabel::Dreb, 40)).unwrap();
        assert_eq!(m2.ground_truths()[0].frame, 40);
        assert!(m.ground_truths().is_empty());
        assert!(m.with_annotation(Annotation::new("a", ClassLabel::Dreb, 400)).is_err());
        assert!(m.with_annotation(Annotation::new("zz", ClassLabel::Dreb, 4)).is_err());
    }
}
