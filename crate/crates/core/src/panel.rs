//! Majority-vote aggregation of expert ballots and the AI-versus-panel
//! comparison table.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::label::ClassLabel;
use crate::metrics::{binary_summary, confusion, prf1, BinarySummary, ConfusionMatrix, MetricsError, Prf1Report};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PanelError {
    #[error("panel size must be odd and positive, got {0}")]
    EvenPanel(usize),
    #[error("video {video_id:?} has {got} ballots, expected {expected}")]
    WrongBallotCount { video_id: String, got: usize, expected: usize },
    #[error("expert {expert_id:?} voted twice on video {video_id:?}")]
    DuplicateBallot { expert_id: String, video_id: String },
    #[error("ballot label must be OREB or DREB, got {0}")]
    InvalidLabel(ClassLabel),
    #[error("video sets differ; offending ids: {0:?}")]
    VideoSetMismatch(Vec<String>),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    pub expert_id: String,
    pub video_id: String,
    pub label: ClassLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelDecision {
    pub label: ClassLabel,
    /// Winning votes minus losing votes.
    pub margin: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelResult {
    pub panel_size: usize,
    pub decisions: BTreeMap<String, PanelDecision>,
}

impl PanelResult {
    pub fn labels(&self) -> BTreeMap<String, ClassLabel> {
        self.decisions.iter().map(|(k, d)| (k.clone(), d.label)).collect()
    }
}

/// Per-video majority over exactly `panel_size` distinct experts.
pub fn majority_vote(ballots: &[Ballot], panel_size: usize) -> Result<PanelResult, PanelError> {
    if panel_size == 0 || panel_size.is_multiple_of(2) {
        return Err(PanelError::EvenPanel(panel_size));
    }
    let mut per_video: BTreeMap<&str, BTreeMap<&str, ClassLabel>> = BTreeMap::new();
    for b in ballots {
        if !b.label.is_action() {
            return Err(PanelError::InvalidLabel(b.label));
        }
        let votes = per_video.entry(&b.video_id).or_default();
        if votes.insert(&b.expert_id, b.label).is_some() {
            return Err(PanelError::DuplicateBallot { expert_id: b.expert_id.clone(), video_id: b.video_id.clone() });
        }
    }
    let mut decisions = BTreeMap::new();
    for (video, votes) in per_video {
        if votes.len() != panel_size {
            return Err(PanelError::WrongBallotCount { video_id: video.to_string(), got: votes.len(), expected: panel_size });
        }
        let oreb = votes.values().filter(|&&l| l == ClassLabel::Oreb).count();
        let dreb = votes.len() - oreb;
        let (label, margin) = if oreb > dreb {
            (ClassLabel::Oreb, oreb - dreb)
        } else {
            (ClassLabel::Dreb, dreb - oreb)
        };
        decisions.insert(video.to_string(), PanelDecision { label, margin });
    }
    Ok(PanelResult { panel_size, decisions })
}

/// Signed AI-minus-humans differences of the single-row binary metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl MetricDelta {
    pub fn between(ai: &BinarySummary, humans: &BinarySummary) -> MetricDelta {
        MetricDelta {
            precision: ai.precision - humans.precision,
            recall: ai.recall - humans.recall,
            f1: ai.f1 - humans.f1,
            accuracy: ai.accuracy - humans.accuracy,
        }
    }

    /// Two-decimal display: `+0.15`, `-0.05`, and `0.00` for anything that rounds to zero.
    pub fn display(&self) -> [String; 4] {
        [self.precision, self.recall, self.f1, self.accuracy].map(signed_2dp)
    }
}

pub fn signed_2dp(x: f64) -> String {
    let cents = (x * 100.0).round();
    if cents == 0.0 {
        "0.00".to_string()
    } else {
        format!("{:+.2}", cents / 100.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub positive: ClassLabel,
    pub videos: usize,
    pub ai: Prf1Report,
    pub humans: Prf1Report,
    pub ai_summary: BinarySummary,
    pub human_summary: BinarySummary,
    pub ai_confusion: ConfusionMatrix,
    pub human_confusion: ConfusionMatrix,
    pub ai_confusion_normalized: Vec<Vec<f64>>,
    pub human_confusion_normalized: Vec<Vec<f64>>,
    pub delta: MetricDelta,
}

fn symmetric_difference(a: &BTreeMap<String, ClassLabel>, b: &BTreeMap<String, ClassLabel>) -> BTreeSet<String> {
    a.keys().filter(|k| !b.contains_key(*k)).chain(b.keys().filter(|k| !a.contains_key(*k))).cloned().collect()
}

/// Compares AI predictions and the panel against ground truth on the same videos.
pub fn compare(
    ai: &BTreeMap<String, ClassLabel>,
    panel: &PanelResult,
    gts: &BTreeMap<String, ClassLabel>,
    positive: ClassLabel,
) -> Result<Comparison, PanelError> {
    let humans = panel.labels();
    let mut offending = symmetric_difference(ai, gts);
    offending.extend(symmetric_difference(&humans, gts));
    if !offending.is_empty() {
        return Err(PanelError::VideoSetMismatch(offending.into_iter().collect()));
    }
    let classes = ClassLabel::ACTIONS;
    let truth: Vec<ClassLabel> = gts.values().copied().collect();
    let ai_preds: Vec<ClassLabel> = gts.keys().map(|k| ai[k]).collect();
    let human_preds: Vec<ClassLabel> = gts.keys().map(|k| humans[k]).collect();
    let ai_confusion = confusion(&ai_preds, &truth, &classes)?;
    let human_confusion = confusion(&human_preds, &truth, &classes)?;
    let ai_summary = binary_summary(&ai_confusion, positive)?;
    let human_summary = binary_summary(&human_confusion, positive)?;
    Ok(Comparison {
        positive,
        videos: gts.len(),
        ai: prf1(&ai_confusion),
        humans: prf1(&human_confusion),
        delta: MetricDelta::between(&ai_summary, &human_summary),
        ai_summary,
        human_summary,
        ai_confusion_normalized: ai_confusion.row_normalized(),
        human_confusion_normalized: human_confusion.row_normalized(),
        ai_confusion,
        human_confusion,
    })
}
