//! Evaluation metrics and reference loss formulas. Everything here is a pure
//! function of its inputs.

mod classification;
mod loss;
mod spotting;

pub use classification::{accuracy, binary_summary, confusion, prf1, BinarySummary, ClassMetrics, ConfusionMatrix, Prf1Report};
pub use loss::{bce_loss, weighted_ce_clip, weighted_ce_frames, ClassWeights, LOG_EPS};
pub use spotting::{average_precision, map_at, match_detections, tolerance_frames, ApTable, MatchResult};

use crate::label::ClassLabel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("label {0} is not one of the evaluated classes")]
    UnknownLabel(ClassLabel),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}
