//! Synthetic score streams with planted events.
//!
//! Each video gets a background-dominated probability stream with one bump
//! of the event class at the planted frame, and optionally one spurious bump
//! far enough away to survive NMS as a second detection. Randomness for
//! video `i` comes from its own ChaCha stream keyed by `(seed, i)`, so
//! corpora can be generated in parallel and any single video regenerated
//! alone.
//!
//! With `noise <= 0.01`, `width >= 20` and `peak >= 0.8`, the default
//! post-processing recovers exactly one detection per video within three
//! frames of the planted one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Annotation, Manifest, ManifestEntry, Provenance, VideoMeta};
use crate::label::ClassLabel;
use crate::postprocess::ScoreStream;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid simulator config: {0}")]
pub struct SimError(pub String);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// `1 - |d| / width`, zero beyond `width`.
    #[default]
    Triangular,
    /// `exp(-d^2 / (2 sigma^2))` with `sigma = width / 2`, cut at `3 sigma`.
    Gaussian,
    /// Flat at 1 for `|d| <= plateau`, then a linear ramp of length `width`.
    FlatTop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub num_videos: usize,
    pub fps: u32,
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    /// Fraction of OREB videos, assigned by exact quota.
    pub oreb_fraction: f64,
    /// Planted frames are uniform over `[placement_lo, placement_hi)` of the video.
    pub placement_lo: f64,
    pub placement_hi: f64,
    pub peak: f64,
    /// With probability `low_peak_prob` the planted bump uses `low_peak` instead.
    pub low_peak: f64,
    pub low_peak_prob: f64,
    pub shape: BumpShape,
    /// Bump half-width in frames.
    pub width: u32,
    /// Plateau half-width for [`BumpShape::FlatTop`].
    pub plateau: u32,
    /// Each probability gets `U(0, noise)` added before renormalizing.
    pub noise: f64,
    /// Probability of one extra spurious bump.
    pub spurious_prob: f64,
    pub spurious_peak: f64,
    /// Minimum distance in frames between the planted and spurious bumps.
    pub spurious_min_separation: u32,
    pub stride: u32,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_videos: 100,
            fps: 60,
            min_duration_s: 5.0,
            max_duration_s: 15.0,
            oreb_fraction: 0.5,
            placement_lo: 0.2,
            placement_hi: 0.8,
            peak: 0.95,
            low_peak: 0.9,
            low_peak_prob: 0.0,
            shape: BumpShape::Triangular,
            width: 30,
            plateau: 4,
            noise: 0.005,
            spurious_prob: 0.0,
            spurious_peak: 0.9,
            spurious_min_separation: 150,
            stride: 1,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(SimError(format!("{name} = {x} not in [0, 1]")))
            }
        };
        unit("oreb_fraction", self.oreb_fraction)?;
        unit("placement_lo", self.placement_lo)?;
        unit("placement_hi", self.placement_hi)?;
        unit("peak", self.peak)?;
        unit("low_peak", self.low_peak)?;
        unit("low_peak_prob", self.low_peak_prob)?;
        unit("spurious_prob", self.spurious_prob)?;
        unit("spurious_peak", self.spurious_peak)?;
        if self.fps == 0 || self.stride == 0 || self.width == 0 {
            return Err(SimError("fps, stride and width must be positive".into()));
        }
        if !(self.min_duration_s > 0.0 && self.min_duration_s <= self.max_duration_s && self.max_duration_s.is_finite()) {
            return Err(SimError(format!(
                "duration range [{}, {}] must be positive and ordered",
                self.min_duration_s, self.max_duration_s
            )));
        }
        if self.placement_lo >= self.placement_hi {
            return Err(SimError("placement_lo must be below placement_hi".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(SimError(format!("noise {} must be non-negative", self.noise)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Planted,
    Spurious,
}

/// Oracle record of one bump placed in a stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthEvent {
    pub video_id: String,
    pub kind: EventKind,
    pub label: ClassLabel,
    pub frame: u32,
    pub peak: f64,
}

#[derive(Clone, Debug)]
pub struct SimVideo {
    pub meta: VideoMeta,
    pub annotation: Annotation,
    pub stream: ScoreStream,
    pub truth: Vec<TruthEvent>,
}

#[derive(Clone, Debug)]
pub struct SimCorpus {
    pub manifest: Manifest,
    pub streams: Vec<ScoreStream>,
    pub truth: Vec<TruthEvent>,
}

pub fn video_id(index: usize) -> String {
    format!("sim{index:06}")
}

/// Exact-quota class assignment: over the first `n` videos, exactly
/// `floor(n * oreb_fraction)` are OREB.
fn class_of(index: usize, oreb_fraction: f64) -> ClassLabel {
    let before = (index as f64 * oreb_fraction).floor();
    let after = ((index + 1) as f64 * oreb_fraction).floor();
    if after > before {
        ClassLabel::Oreb
    } else {
        ClassLabel::Dreb
    }
}

fn profile(shape: BumpShape, width: u32, plateau: u32, distance: u32) -> f64 {
    let d = f64::from(distance);
    let w = f64::from(width);
    match shape {
        BumpShape::Triangular => (1.0 - d / w).max(0.0),
        BumpShape::Gaussian => {
            let sigma = w / 2.0;
            if d > 3.0 * sigma {
                0.0
            } else {
                (-d * d / (2.0 * sigma * sigma)).exp()
            }
        }
        BumpShape::FlatTop => {
            if distance <= plateau {
                1.0
            } else {
                (1.0 - (d - f64::from(plateau)) / w).max(0.0)
            }
        }
    }
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn spurious_frame(rng: &mut ChaCha8Rng, planted: u32, num_frames: u32, sep: u32) -> u32 {
    let left = planted.checked_sub(sep).map(|hi| 0..=hi);
    let right = planted.checked_add(sep).filter(|&lo| lo < num_frames).map(|lo| lo..=num_frames - 1);
    let left_len = left.as_ref().map_or(0, |r| r.end() - r.start() + 1);
    let right_len = right.as_ref().map_or(0, |r| r.end() - r.start() + 1);
    if left_len + right_len == 0 {
        // Too short to separate: use whichever end is farther away.
        return if planted >= num_frames - 1 - planted { 0 } else { num_frames - 1 };
    }
    let pick = rng.random_range(0..left_len + right_len);
    match (&left, &right) {
        (Some(l), _) if pick < left_len => l.start() + pick,
        (_, Some(r)) => r.start() + (pick - left_len),
        _ => unreachable!("pick falls in one of the ranges"),
    }
}

/// Generates video `index` of the corpus described by `cfg`.
pub fn gen_stream(cfg: &SimConfig, index: usize) -> Result<SimVideo, SimError> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, index);
    let id = video_id(index);
    let fps = f64::from(cfg.fps);

    let duration = if cfg.max_duration_s > cfg.min_duration_s {
        rng.random_range(cfg.min_duration_s..=cfg.max_duration_s)
    } else {
        cfg.min_duration_s
    };
    let num_frames = ((duration * fps).round() as u32).max(1);
    let meta = VideoMeta::new(id.clone(), cfg.fps, num_frames).map_err(|e| SimError(e.to_string()))?;

    let label = class_of(index, cfg.oreb_fraction);
    let lo = ((cfg.placement_lo * f64::from(num_frames)).round() as u32).min(num_frames - 1);
    let hi = ((cfg.placement_hi * f64::from(num_frames)).round() as u32).clamp(lo + 1, num_frames);
    let planted = rng.random_range(lo..hi);
    let peak = if cfg.low_peak_prob > 0.0 && rng.random_bool(cfg.low_peak_prob) { cfg.low_peak } else { cfg.peak };

    let mut truth = vec![TruthEvent { video_id: id.clone(), kind: EventKind::Planted, label, frame: planted, peak }];
    if cfg.spurious_prob > 0.0 && rng.random_bool(cfg.spurious_prob) {
        let frame = spurious_frame(&mut rng, planted, num_frames, cfg.spurious_min_separation);
        let label = if rng.random_bool(0.5) { ClassLabel::Oreb } else { ClassLabel::Dreb };
        truth.push(TruthEvent { video_id: id.clone(), kind: EventKind::Spurious, label, frame, peak: cfg.spurious_peak });
    }

    let rows = (0..num_frames)
        .step_by(cfg.stride as usize)
        .map(|t| {
            let mut row = [0.0f64; 3];
            for ev in &truth {
                let a = ev.peak * profile(cfg.shape, cfg.width, cfg.plateau, t.abs_diff(ev.frame));
                let c = ev.label.index();
                row[c] = row[c].max(a);
            }
            let action = row[0] + row[1];
            if action > 1.0 {
                row[0] /= action;
                row[1] /= action;
            }
            row[2] = (1.0 - row[0] - row[1]).max(0.0);
            if cfg.noise > 0.0 {
                for v in row.iter_mut() {
                    *v += rng.random_range(0.0..cfg.noise);
                }
            }
            let sum: f64 = row.iter().sum();
            row.map(|v| v / sum)
        })
        .collect();
    let stream = ScoreStream::new(id.clone(), fps, cfg.stride, rows).map_err(|e| SimError(e.to_string()))?;
    Ok(SimVideo { meta, annotation: Annotation::new(id, label, planted), stream, truth })
}

/// Generates the whole corpus. Output is independent of thread scheduling.
pub fn gen_corpus(cfg: &SimConfig) -> Result<SimCorpus, SimError> {
    cfg.validate()?;
    let videos: Vec<SimVideo> = (0..cfg.num_videos).into_par_iter().map(|i| gen_stream(cfg, i)).collect::<Result<_, _>>()?;
    let mut manifest = Manifest::default();
    let mut streams = Vec::with_capacity(videos.len());
    let mut truth = Vec::new();
    for v in videos {
        manifest
            .push(ManifestEntry { meta: v.meta, annotation: Some(v.annotation), provenance: Provenance::Manual })
            .map_err(|e| SimError(e.to_string()))?;
        streams.push(v.stream);
        truth.extend(v.truth);
    }
    Ok(SimCorpus { manifest, streams, truth })
}
