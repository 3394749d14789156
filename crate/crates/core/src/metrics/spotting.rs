//! Spotting evaluation: a detection is correct when its class matches and
//! its frame lies within the closed window of length delta centred on the
//! ground-truth frame. AP uses the all-point interpolated precision envelope.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::GroundTruth;
use crate::label::ClassLabel;
use crate::postprocess::Detection;

/// Half-window in frames, `round(delta * fps / 2)` (half to even).
pub fn tolerance_frames(delta_s: f64, fps: f64) -> u32 {
    (delta_s * fps / 2.0).round_ties_even().max(0.0) as u32
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    /// Detection indices in the order they were ranked and matched.
    pub order: Vec<usize>,
    /// Matched ground-truth index per detection, aligned with the input.
    pub matched: Vec<Option<usize>>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.matched.iter().flatten().count()
    }
}

fn nearest_distance(det: &Detection, gts: &[GroundTruth]) -> u32 {
    gts.iter()
        .filter(|g| g.video_id == det.video_id && g.label == det.label)
        .map(|g| g.frame.abs_diff(det.frame))
        .min()
        .unwrap_or(u32::MAX)
}

/// Ranking used for both matching and AP: confidence descending, then
/// distance to the nearest same-class ground truth, then video, frame and
/// input position.
fn rank(dets: &[Detection], gts: &[GroundTruth]) -> Vec<usize> {
    let dist: Vec<u32> = dets.iter().map(|d| nearest_distance(d, gts)).collect();
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (&dets[a], &dets[b]);
        db.confidence
            .total_cmp(&da.confidence)
            .then(dist[a].cmp(&dist[b]))
            .then_with(|| da.video_id.cmp(&db.video_id))
            .then(da.frame.cmp(&db.frame))
            .then(a.cmp(&b))
    });
    order
}

/// Greedy one-to-one matching in rank order. Each detection takes the
/// closest unmatched ground truth of the same video and class within
/// tolerance (lower index on equal distance).
pub fn match_detections(dets: &[Detection], gts: &[GroundTruth], delta_s: f64, fps: f64) -> MatchResult {
    let tol = tolerance_frames(delta_s, fps);
    let order = rank(dets, gts);
    let mut taken = vec![false; gts.len()];
    let mut matched = vec![None; dets.len()];
    for &i in &order {
        let d = &dets[i];
        let best = gts
            .iter()
            .enumerate()
            .filter(|(j, g)| !taken[*j] && g.video_id == d.video_id && g.label == d.label)
            .map(|(j, g)| (g.frame.abs_diff(d.frame), j))
            .filter(|&(dist, _)| dist <= tol)
            .min();
        if let Some((_, j)) = best {
            taken[j] = true;
            matched[i] = Some(j);
        }
    }
    MatchResult { order, matched }
}

/// AP of `class` at tolerance `delta_s`. Inputs may contain other classes;
/// they are filtered out. Zero when there is no ground truth of `class`.
pub fn average_precision(dets: &[Detection], gts: &[GroundTruth], class: ClassLabel, delta_s: f64, fps: f64) -> f64 {
    let dets: Vec<Detection> = dets.iter().filter(|d| d.label == class).cloned().collect();
    let gts: Vec<GroundTruth> = gts.iter().filter(|g| g.label == class).cloned().collect();
    if gts.is_empty() {
        return 0.0;
    }
    let m = match_detections(&dets, &gts, delta_s, fps);
    let hits: Vec<bool> = m.order.iter().map(|&i| m.matched[i].is_some()).collect();
    let mut precision = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (k, &hit) in hits.iter().enumerate() {
        tp += usize::from(hit);
        precision.push(tp as f64 / (k + 1) as f64);
    }
    // Precision envelope: running max from the right.
    for k in (0..precision.len().saturating_sub(1)).rev() {
        if precision[k + 1] > precision[k] {
            precision[k] = precision[k + 1];
        }
    }
    let total: f64 = hits.iter().zip(&precision).filter(|(h, _)| **h).map(|(_, p)| p).sum();
    total / gts.len() as f64
}

/// Per-class AP at every tolerance, with class means per tolerance and the
/// grand mean over tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApTable {
    pub deltas: Vec<f64>,
    pub classes: Vec<ClassLabel>,
    /// `ap[c][d]` for `classes[c]` at `deltas[d]`.
    pub ap: Vec<Vec<f64>>,
    /// Mean over classes, per delta.
    pub map_per_delta: Vec<f64>,
    /// Mean over deltas, per class.
    pub class_mean: Vec<f64>,
    /// Mean over deltas of `map_per_delta`.
    pub grand_mean: f64,
}

impl ApTable {
    pub fn get(&self, class: ClassLabel, delta_s: f64) -> Option<f64> {
        let c = self.classes.iter().position(|&x| x == class)?;
        let d = self.deltas.iter().position(|&x| x.total_cmp(&delta_s) == Ordering::Equal)?;
        Some(self.ap[c][d])
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn map_at(dets: &[Detection], gts: &[GroundTruth], deltas: &[f64], fps: f64) -> ApTable {
    let classes = ClassLabel::ACTIONS.to_vec();
    let ap: Vec<Vec<f64>> = classes
        .iter()
        .map(|&c| deltas.iter().map(|&d| average_precision(dets, gts, c, d, fps)).collect())
        .collect();
    let map_per_delta: Vec<f64> = (0..deltas.len()).map(|d| mean(&ap.iter().map(|row| row[d]).collect::<Vec<_>>())).collect();
    let class_mean = ap.iter().map(|row| mean(row)).collect();
    ApTable {
        deltas: deltas.to_vec(),
        classes,
        grand_mean: mean(&map_per_delta),
        ap,
        map_per_delta,
        class_mean,
    }
}
