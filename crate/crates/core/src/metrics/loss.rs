//! Reference implementations of the binary and class-weighted cross-entropy
//! losses used for offline anticipation, online anticipation and spotting.

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::label::ClassLabel;

/// Probabilities are clamped to `[LOG_EPS, 1 - LOG_EPS]` before taking logs.
pub const LOG_EPS: f64 = 1e-7;

fn clamped_ln(p: f64) -> f64 {
    p.clamp(LOG_EPS, 1.0 - LOG_EPS).ln()
}

/// Class weights in (DREB, OREB, BACKGROUND) order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights(pub [f64; 3]);

impl ClassWeights {
    /// Clip-level weights for online anticipation.
    pub const CLIP: ClassWeights = ClassWeights([0.49, 0.49, 0.02]);
    /// Frame-level weights for spotting.
    pub const FRAME: ClassWeights = ClassWeights([0.49999, 0.49999, 0.00002]);

    pub fn get(&self, label: ClassLabel) -> f64 {
        self.0[label.index()]
    }
}

/// Mean binary cross-entropy.
pub fn bce_loss(targets: &[bool], probs: &[f64]) -> Result<f64, MetricsError> {
    if targets.len() != probs.len() {
        return Err(MetricsError::LengthMismatch { left: targets.len(), right: probs.len() });
    }
    if targets.is_empty() {
        return Err(MetricsError::Empty);
    }
    let sum: f64 = targets
        .iter()
        .zip(probs)
        .map(|(&y, &p)| if y { -clamped_ln(p) } else { -clamped_ln(1.0 - p) })
        .sum();
    Ok(sum / targets.len() as f64)
}

/// Weighted cross-entropy summed over clips (no normalization: every clip
/// has the same length).
pub fn weighted_ce_clip(targets: &[ClassLabel], probs: &[[f64; 3]], weights: ClassWeights) -> Result<f64, MetricsError> {
    if targets.len() != probs.len() {
        return Err(MetricsError::LengthMismatch { left: targets.len(), right: probs.len() });
    }
    Ok(targets
        .iter()
        .zip(probs)
        .map(|(&c, p)| -weights.get(c) * clamped_ln(p[c.index()]))
        .sum())
}

/// Weighted frame-level cross-entropy, divided by the total number of frames
/// in the batch so every frame counts equally regardless of video length.
pub fn weighted_ce_frames(targets: &[Vec<ClassLabel>], probs: &[Vec<[f64; 3]>], weights: ClassWeights) -> Result<f64, MetricsError> {
    if targets.len() != probs.len() {
        return Err(MetricsError::LengthMismatch { left: targets.len(), right: probs.len() });
    }
    let mut total = 0.0;
    let mut frames = 0usize;
    for (v, (t, p)) in targets.iter().zip(probs).enumerate() {
        if t.len() != p.len() {
            return Err(MetricsError::ShapeMismatch(format!(
                "video {v}: {} target frames vs {} probability rows",
                t.len(),
                p.len()
            )));
        }
        frames += t.len();
        total += weighted_ce_clip(t, p, weights)?;
    }
    if frames == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(total / frames as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;
    use ClassLabel::{Background as B, Oreb as O};

    #[test]
    fn bce_closed_forms() {
        assert!(bce_loss(&[true], &[1.0]).unwrap() < 1e-6);
        assert!((bce_loss(&[true], &[0.5]).unwrap() - LN_2).abs() < 1e-12);
        let a = bce_loss(&[true], &[0.3]).unwrap();
        let b = bce_loss(&[false], &[0.8]).unwrap();
        assert!((bce_loss(&[true, false], &[0.3, 0.8]).unwrap() - (a + b) / 2.0).abs() < 1e-15);
        assert!(bce_loss(&[true], &[0.0]).unwrap().is_finite());
        assert!(bce_loss(&[true], &[0.5, 0.5]).is_err());
        assert!(bce_loss(&[], &[]).is_err());
    }

    #[test]
    fn clip_loss_closed_forms() {
        assert!(weighted_ce_clip(&[O], &[[0.0, 1.0, 0.0]], ClassWeights::CLIP).unwrap() < 1e-6);
        let action = weighted_ce_clip(&[O], &[[0.25, 0.5, 0.25]], ClassWeights::CLIP).unwrap();
        assert!((action - 0.49 * LN_2).abs() < 1e-12);
        let bg = weighted_ce_clip(&[B], &[[0.25, 0.25, 0.5]], ClassWeights::CLIP).unwrap();
        assert!((bg - 0.02 * LN_2).abs() < 1e-12);
        assert!((action / bg - 24.5).abs() < 1e-9);
        assert!(weighted_ce_clip(&[O, B], &[[0.0, 1.0, 0.0]], ClassWeights::CLIP).is_err());
    }

    #[test]
    fn frame_loss_closed_forms() {
        let l = weighted_ce_frames(&[vec![B, B]], &[vec![[0.25, 0.25, 0.5]; 2]], ClassWeights::FRAME).unwrap();
        assert!((l - 0.00002 * LN_2).abs() < 1e-15);
        // Equal per-frame loss in videos of 1 and 3 frames gives that same loss.
        let p = [0.1, 0.6, 0.3];
        let single = weighted_ce_frames(&[vec![O]], &[vec![p]], ClassWeights::FRAME).unwrap();
        let both = weighted_ce_frames(&[vec![O], vec![O; 3]], &[vec![p], vec![p; 3]], ClassWeights::FRAME).unwrap();
        assert!((single - both).abs() < 1e-15);
        assert!(weighted_ce_frames(&[vec![O, O]], &[vec![p]], ClassWeights::FRAME).is_err());
        assert!(weighted_ce_frames(&[], &[], ClassWeights::FRAME).is_err());
    }
}
