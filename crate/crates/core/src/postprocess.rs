//! Turns per-frame class probabilities into discrete detections:
//! temporal smoothing, confidence thresholding, then temporal NMS.
//! Also hosts min-max normalization of activation volumes.

use ndarray::{Array, ArrayBase, Data, Dimension};
use serde::{Deserialize, Serialize};

use crate::label::ClassLabel;

/// Tolerance on per-row probability sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PostprocessError {
    #[error("video {video_id:?} row {row}: {reason}")]
    InvalidRow { video_id: String, row: usize, reason: String },
    #[error("invalid stream: {0}")]
    InvalidStream(String),
    #[error("smoothing window must be odd and positive, got {0}")]
    InvalidWindow(usize),
    #[error("threshold {0} not in [0, 1]")]
    InvalidThreshold(f64),
    #[error("NMS window must be positive, got {0} s")]
    InvalidNmsWindow(f64),
    #[error("activation volume is empty")]
    EmptyVolume,
}

/// Frame-wise class probabilities for one video, columns (DREB, OREB, BACKGROUND).
///
/// Row `r` corresponds to original frame `r * stride`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreStream {
    video_id: String,
    fps: f64,
    stride: u32,
    scores: Vec<[f64; 3]>,
}

impl ScoreStream {
    pub fn new(video_id: impl Into<String>, fps: f64, stride: u32, scores: Vec<[f64; 3]>) -> Result<Self, PostprocessError> {
        let video_id = video_id.into();
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(PostprocessError::InvalidStream(format!("fps {fps} must be positive")));
        }
        if stride == 0 {
            return Err(PostprocessError::InvalidStream("stride must be at least 1".into()));
        }
        for (row, p) in scores.iter().enumerate() {
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(PostprocessError::InvalidRow {
                    video_id,
                    row,
                    reason: format!("probabilities {p:?} outside [0, 1]"),
                });
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(PostprocessError::InvalidRow { video_id, row, reason: format!("row sums to {sum}") });
            }
        }
        Ok(ScoreStream { video_id, fps, stride, scores })
    }

    fn with_scores(&self, scores: Vec<[f64; 3]>) -> ScoreStream {
        ScoreStream { video_id: self.video_id.clone(), fps: self.fps, stride: self.stride, scores }
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    /// Original (pre-stride) frame rate.
    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn fps_effective(&self) -> f64 {
        self.fps / f64::from(self.stride)
    }

    pub fn scores(&self) -> &[[f64; 3]] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Original-frame index of row `row`.
    pub fn frame_of_row(&self, row: usize) -> u32 {
        row as u32 * self.stride
    }
}

/// A spotted event in original-frame coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub video_id: String,
    pub frame: u32,
    pub label: ClassLabel,
    pub confidence: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmsMode {
    /// One suppression pass over all classes together.
    #[default]
    Joint,
    PerClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostProcessConfig {
    pub smooth_window: usize,
    pub threshold: f64,
    pub nms_window_s: f64,
    pub nms_mode: NmsMode,
}

impl Default for PostProcessConfig {
    fn default() -> Self {
        PostProcessConfig { smooth_window: 7, threshold: 0.7, nms_window_s: 2.5, nms_mode: NmsMode::Joint }
    }
}

impl PostProcessConfig {
    pub fn validate(&self) -> Result<(), PostprocessError> {
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return Err(PostprocessError::InvalidWindow(self.smooth_window));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(PostprocessError::InvalidThreshold(self.threshold));
        }
        if !(self.nms_window_s > 0.0) {
            return Err(PostprocessError::InvalidNmsWindow(self.nms_window_s));
        }
        Ok(())
    }
}

/// Centered moving average per class. Near the edges the mean is taken over
/// the neighbours that exist, so rows stay stochastic and the length is kept.
pub fn smooth(stream: &ScoreStream, window: usize) -> Result<ScoreStream, PostprocessError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(PostprocessError::InvalidWindow(window));
    }
    let half = window / 2;
    let n = stream.len();
    let out = (0..n)
        .map(|t| {
            let neighbourhood = &stream.scores[t.saturating_sub(half)..(t + half + 1).min(n)];
            let count = neighbourhood.len() as f64;
            let mut row = [0.0; 3];
            for (c, v) in row.iter_mut().enumerate() {
                *v = (neighbourhood.iter().map(|r| r[c]).sum::<f64>() / count).clamp(0.0, 1.0);
            }
            row
        })
        .collect();
    Ok(stream.with_scores(out))
}

/// Rows whose largest probability is below `theta` become pure background.
pub fn threshold(stream: &ScoreStream, theta: f64) -> ScoreStream {
    let out = stream
        .scores
        .iter()
        .map(|row| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max < theta {
                [0.0, 0.0, 1.0]
            } else {
                *row
            }
        })
        .collect();
    stream.with_scores(out)
}

/// Index of the winning class. Background wins ties against an action; DREB
/// wins a DREB/OREB tie.
fn argmax(row: &[f64; 3]) -> usize {
    let action = if row[1] > row[0] { 1 } else { 0 };
    if row[2] >= row[action] {
        2
    } else {
        action
    }
}

/// One candidate per frame whose argmax is an action class, with the
/// argmax probability as confidence.
pub fn frames_to_candidates(stream: &ScoreStream) -> Vec<Detection> {
    stream
        .scores
        .iter()
        .enumerate()
        .filter_map(|(row, p)| {
            let c = argmax(p);
            (c != ClassLabel::Background.index()).then(|| Detection {
                video_id: stream.video_id.clone(),
                frame: stream.frame_of_row(row),
                label: ClassLabel::ALL[c],
                confidence: p[c],
            })
        })
        .collect()
}

/// Greedy temporal NMS. Candidates are visited by descending confidence
/// (earlier frame first on ties); each kept detection suppresses every other
/// candidate within `window_s / 2` seconds, inclusive. Output is sorted by frame.
pub fn nms(candidates: &[Detection], window_s: f64, fps: f64, mode: NmsMode) -> Vec<Detection> {
    let half = window_s * fps / 2.0;
    let mut order: Vec<&Detection> = candidates.iter().collect();
    order.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.frame.cmp(&b.frame)));
    let mut kept: Vec<Detection> = Vec::new();
    for cand in order {
        let suppressed = kept.iter().any(|k| {
            let same_group = mode == NmsMode::Joint || k.label == cand.label;
            same_group && k.video_id == cand.video_id && f64::from(k.frame.abs_diff(cand.frame)) <= half
        });
        if !suppressed {
            kept.push(cand.clone());
        }
    }
    kept.sort_by(|a, b| a.frame.cmp(&b.frame).then(b.confidence.total_cmp(&a.confidence)));
    kept
}

/// `nms(frames_to_candidates(threshold(smooth(stream))))`.
pub fn run_pipeline(stream: &ScoreStream, cfg: &PostProcessConfig) -> Result<Vec<Detection>, PostprocessError> {
    cfg.validate()?;
    let smoothed = smooth(stream, cfg.smooth_window)?;
    let thresholded = threshold(&smoothed, cfg.threshold);
    let candidates = frames_to_candidates(&thresholded);
    Ok(nms(&candidates, cfg.nms_window_s, stream.fps, cfg.nms_mode))
}

/// Epsilon in activation min-max normalization.
pub const ACTIVATION_EPS: f64 = 1e-8;

/// `(v - min) / (max - min + eps)` with min and max over the whole volume.
pub fn normalize_activation<S, D>(volume: &ArrayBase<S, D>, eps: f64) -> Result<Array<f64, D>, PostprocessError>
where
    S: Data<Elem = f64>,
    D: Dimension,
{
    if volume.is_empty() {
        return Err(PostprocessError::EmptyVolume);
    }
    let min = volume.iter().copied().fold(f64::INFINITY, f64::min);
    let max = volume.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let denom = max - min + eps;
    Ok(volume.mapv(|v| (v - min) / denom))
}
