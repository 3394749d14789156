//! Filtering cascade that turns spotting detections on unlabelled videos into
//! a class-balanced pseudo-annotated manifest. The class of every surviving
//! video comes from the scraped label; only the event frame is inferred.
//!
//! Stages: single detection per video, minimum confidence, agreement with
//! the scraped class, then seeded balancing of the two classes.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Annotation, DataError, Manifest, ManifestEntry, Provenance, VideoMeta};
use crate::label::ClassLabel;
use crate::postprocess::Detection;

#[derive(Debug, thiserror::Error)]
pub enum PseudoError {
    #[error("cannot balance: no surviving {0} videos")]
    EmptyClass(ClassLabel),
    #[error("detections reference videos without a scraped class: {0:?}")]
    UnknownVideos(Vec<String>),
    #[error("scraped class for {0:?} must be OREB or DREB")]
    InvalidClass(String),
    #[error("min_confidence {0} must be non-negative")]
    InvalidConfidence(f64),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PseudoFilterConfig {
    pub max_detections_per_video: usize,
    pub min_confidence: f64,
    pub balance: bool,
    pub seed: u64,
}

impl Default for PseudoFilterConfig {
    fn default() -> Self {
        PseudoFilterConfig { max_detections_per_video: 1, min_confidence: 0.99, balance: true, seed: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SingleFilterOutcome {
    pub survivors: BTreeMap<String, Detection>,
    /// Videos with more than the allowed number of detections.
    pub rejected_multi: Vec<String>,
    /// Videos with no detection at all.
    pub rejected_empty: Vec<String>,
    /// Number of videos per detection count.
    pub histogram: BTreeMap<usize, usize>,
}

/// Keeps videos with exactly one detection. `max_detections` above one
/// keeps the most confident detection of videos with up to that many.
pub fn filter_single(grouped: &BTreeMap<String, Vec<Detection>>, max_detections: usize) -> SingleFilterOutcome {
    let mut out = SingleFilterOutcome::default();
    for (video, dets) in grouped {
        *out.histogram.entry(dets.len()).or_default() += 1;
        match dets.len() {
            0 => out.rejected_empty.push(video.clone()),
            n if n > max_detections.max(1) => out.rejected_multi.push(video.clone()),
            _ => {
                let best = dets
                    .iter()
                    .max_by(|a, b| a.confidence.total_cmp(&b.confidence).then(b.frame.cmp(&a.frame)))
                    .expect("non-empty");
                out.survivors.insert(video.clone(), best.clone());
            }
        }
    }
    out
}

/// Splits detections into those with `confidence >= min_conf` and the rest.
pub fn filter_confidence(dets: Vec<Detection>, min_conf: f64) -> (Vec<Detection>, Vec<Detection>) {
    dets.into_iter().partition(|d| d.confidence >= min_conf)
}

/// Keeps the whole minority class and a uniform seeded subsample of the
/// majority class of the same size. Relative order within each list is kept.
pub fn balance(
    per_class: &BTreeMap<ClassLabel, Vec<String>>,
    seed: u64,
) -> Result<BTreeMap<ClassLabel, Vec<String>>, PseudoError> {
    for class in ClassLabel::ACTIONS {
        if per_class.get(&class).is_none_or(Vec::is_empty) {
            return Err(PseudoError::EmptyClass(class));
        }
    }
    let target = ClassLabel::ACTIONS.iter().map(|c| per_class[c].len()).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for class in ClassLabel::ACTIONS {
        let ids = &per_class[&class];
        let kept = if ids.len() == target {
            ids.clone()
        } else {
            let mut picked = sample(&mut rng, ids.len(), target).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| ids[i].clone()).collect()
        };
        out.insert(class, kept);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoStats {
    pub input: usize,
    pub rejected_empty: usize,
    pub rejected_multi: usize,
    pub rejected_conf: usize,
    pub rejected_conflict: usize,
    pub per_class_before: BTreeMap<ClassLabel, usize>,
    pub per_class_after: BTreeMap<ClassLabel, usize>,
    /// Detection-count histogram over the input videos.
    pub multiplicity: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug)]
pub struct PseudoDataset {
    pub manifest: Manifest,
    pub stats: PseudoStats,
}

/// Runs the full cascade over every video in `videos` that has a scraped
/// class in `class_gt`. Videos without detections count as `rejected_empty`.
pub fn run_filter(
    detections: &[Detection],
    videos: &[VideoMeta],
    class_gt: &BTreeMap<String, ClassLabel>,
    cfg: &PseudoFilterConfig,
) -> Result<PseudoDataset, PseudoError> {
    // Values above 1 are allowed and reject every detection.
    if !(cfg.min_confidence >= 0.0) {
        return Err(PseudoError::InvalidConfidence(cfg.min_confidence));
    }
    if let Some((id, _)) = class_gt.iter().find(|(_, c)| !c.is_action()) {
        return Err(PseudoError::InvalidClass(id.clone()));
    }
    let unknown: Vec<String> = detections
        .iter()
        .filter(|d| !class_gt.contains_key(&d.video_id))
        .map(|d| d.video_id.clone())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !unknown.is_empty() {
        return Err(PseudoError::UnknownVideos(unknown));
    }

    let mut grouped: BTreeMap<String, Vec<Detection>> = class_gt.keys().map(|k| (k.clone(), Vec::new())).collect();
    for d in detections {
        grouped.get_mut(&d.video_id).expect("checked above").push(d.clone());
    }

    let single = filter_single(&grouped, cfg.max_detections_per_video);
    let (confident, low) = filter_confidence(single.survivors.into_values().collect(), cfg.min_confidence);
    let (agreeing, conflicting): (Vec<Detection>, Vec<Detection>) =
        confident.into_iter().partition(|d| class_gt[&d.video_id] == d.label);

    let mut per_class: BTreeMap<ClassLabel, Vec<String>> = ClassLabel::ACTIONS.iter().map(|&c| (c, Vec::new())).collect();
    for d in &agreeing {
        per_class.get_mut(&class_gt[&d.video_id]).expect("action class").push(d.video_id.clone());
    }
    let per_class_before = per_class.iter().map(|(c, v)| (*c, v.len())).collect();
    let kept = if cfg.balance && per_class.values().all(|v| !v.is_empty()) {
        balance(&per_class, cfg.seed)?
    } else if cfg.balance {
        // Nothing to balance against: an empty class empties the output.
        per_class.keys().map(|c| (*c, Vec::new())).collect()
    } else {
        per_class
    };
    let per_class_after = kept.iter().map(|(c, v)| (*c, v.len())).collect();

    let keep: std::collections::BTreeSet<&String> = kept.values().flatten().collect();
    let by_id: BTreeMap<&str, &VideoMeta> = videos.iter().map(|v| (v.id.as_str(), v)).collect();
    let mut manifest = Manifest::default();
    for d in agreeing.iter().filter(|d| keep.contains(&d.video_id)) {
        let meta = by_id
            .get(d.video_id.as_str())
            .ok_or_else(|| DataError::UnknownVideo(d.video_id.clone()))?;
        manifest.push(ManifestEntry {
            meta: (*meta).clone(),
            annotation: Some(Annotation::new(d.video_id.clone(), class_gt[&d.video_id], d.frame)),
            provenance: Provenance::Pseudo,
        })?;
    }

    let stats = PseudoStats {
        input: class_gt.len(),
        rejected_empty: single.rejected_empty.len(),
        rejected_multi: single.rejected_multi.len(),
        rejected_conf: low.len(),
        rejected_conflict: conflicting.len(),
        per_class_before,
        per_class_after,
        multiplicity: single.histogram,
    };
    Ok(PseudoDataset { manifest, stats })
}
