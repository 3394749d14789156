//! Non-neural machinery for basketball rebound spotting and anticipation:
//! dataset manifests and splits, clip sampling, score post-processing,
//! evaluation metrics and losses, pseudo-label filtering, expert-panel
//! aggregation, and a synthetic score-stream simulator used to exercise all
//! of the above without trained models.
//!
//! Frames are 0-indexed everywhere. Seconds are converted to frames with
//! [`secs_to_frames`] (round half to even).

pub mod data;
pub mod formats;
pub mod label;
pub mod metrics;
pub mod panel;
pub mod postprocess;
pub mod pseudolabel;
pub mod report;
pub mod sampling;
pub mod sim;

pub use data::{Annotation, Flag, Flags, Manifest, ManifestEntry, Provenance, SplitSet, VideoMeta};
pub use label::ClassLabel;
pub use postprocess::{Detection, ScoreStream};

/// Converts a duration in seconds to a frame count at `fps`, rounding half to even.
pub fn secs_to_frames(secs: f64, fps: f64) -> i64 {
    (secs * fps).round_ties_even() as i64
}
