use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::Args;
use rebound_core::formats::{detections, predictions};
use rebound_core::metrics::{confusion, map_at, prf1, ConfusionMatrix, Prf1Report};
use rebound_core::report::{render_confusion, render_prf1, render_spotting, SpottingReport};
use rebound_core::{ClassLabel, Detection};
use serde::{Deserialize, Serialize};

use super::{absolute, load_manifest, Outputs, Subset, SubsetSel};
use crate::error::{CliError, Result};

/// Score detections (mAP@delta) or per-video class predictions against the manifest.
#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    pub detections: Option<PathBuf>,
    /// CSV `video_id,label` for clip- or video-level classification.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Tolerances in seconds.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub deltas: Vec<f64>,
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub subset: Option<Subset>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluateJob {
    pub manifest: PathBuf,
    pub detections: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub deltas: Vec<f64>,
    pub subset: Option<SubsetSel>,
}

impl EvaluateArgs {
    pub fn resolve(self) -> Result<EvaluateJob> {
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(CliError::config(format!("deltas must be positive seconds, got {:?}", self.deltas)));
        }
        Ok(EvaluateJob {
            manifest: absolute(&self.manifest)?,
            detections: self.detections.as_deref().map(absolute).transpose()?,
            predictions: self.predictions.as_deref().map(absolute).transpose()?,
            deltas: self.deltas,
            subset: SubsetSel::resolve(self.split, self.subset)?,
        })
    }
}

#[derive(Serialize)]
struct ClassificationReport {
    videos: usize,
    metrics: Prf1Report,
    confusion: ConfusionMatrix,
    confusion_normalized: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SpottingOutput {
    #[serde(flatten)]
    report: SpottingReport,
    /// Detections on videos without usable ground truth (unannotated or excluded).
    ignored_detections: usize,
}

impl EvaluateJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = load_manifest(&self.manifest, self.subset.as_ref())?;
        if let Some(path) = &self.detections {
            let dets = detections::read(path)?;
            let unknown: BTreeSet<String> = dets.iter().filter(|d| !m.contains(&d.video_id)).map(|d| d.video_id.clone()).collect();
            if !unknown.is_empty() {
                return Err(CliError::offending_ids("detections for videos outside the evaluated set", &unknown.into_iter().collect::<Vec<_>>()));
            }
            let gts = m.ground_truths();
            let gt_videos: BTreeSet<&str> = gts.iter().map(|g| g.video_id.as_str()).collect();
            let (kept, ignored): (Vec<Detection>, Vec<Detection>) = dets.into_iter().partition(|d| gt_videos.contains(d.video_id.as_str()));
            let rates: BTreeSet<u32> = gts.iter().map(|g| m.get(&g.video_id).expect("gt from manifest").meta.fps).collect();
            if rates.len() > 1 {
                return Err(CliError::validation(format!("mixed frame rates {rates:?}; evaluate each rate separately")));
            }
            let fps = f64::from(rates.into_iter().next().unwrap_or(60));
            let report = SpottingReport {
                videos: gt_videos.len(),
                ground_truths: gts.len(),
                detections: kept.len(),
                fps,
                ap: map_at(&kept, &gts, &self.deltas, fps),
            };
            let text = render_spotting(&report);
            print!("{text}");
            out.json("report.json", &SpottingOutput { report, ignored_detections: ignored.len() })?;
            out.write("report.txt", &text)
        } else {
            let path = self.predictions.as_ref().expect("clap requires one input");
            let preds = predictions::read(path)?;
            let truth: BTreeMap<String, ClassLabel> = m
                .entries()
                .iter()
                .filter_map(|e| e.annotation.as_ref().filter(|a| !a.is_mislabeled()).and_then(|a| a.label).map(|l| (e.meta.id.clone(), l)))
                .collect();
            let mismatch: Vec<String> = preds
                .keys()
                .filter(|k| !truth.contains_key(*k))
                .chain(truth.keys().filter(|k| !preds.contains_key(*k)))
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if !mismatch.is_empty() {
                return Err(CliError::offending_ids("prediction and ground-truth video sets differ", &mismatch));
            }
            let classes: &[ClassLabel] = if preds.values().any(|l| !l.is_action()) { &ClassLabel::ALL } else { &ClassLabel::ACTIONS };
            let p: Vec<ClassLabel> = truth.keys().map(|k| preds[k]).collect();
            let g: Vec<ClassLabel> = truth.values().copied().collect();
            let cm = confusion(&p, &g, classes).map_err(CliError::validation)?;
            let report = ClassificationReport { videos: g.len(), metrics: prf1(&cm), confusion_normalized: cm.row_normalized(), confusion: cm };
            let text = format!("{}\n{}", render_prf1(&report.metrics), render_confusion(&report.confusion, &report.confusion_normalized));
            print!("{text}");
            out.json("report.json", &report)?;
            out.write("report.txt", &text)
        }
    }
}
