//! Index-level temporal preprocessing: striding, left padding, offline
//! trimming and online sliding-window clips with anticipation-window labels.
//!
//! Clip geometry is computed in original frames; the stride is applied
//! afterwards when listing the frames a model would actually see.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{GroundTruth, Manifest, VideoMeta};
use crate::label::ClassLabel;
use crate::secs_to_frames;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplingError {
    #[error("stride must be at least 1")]
    InvalidStride,
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
    #[error("clip of {clip_frames} frames does not fit in video {video_id:?} of {num_frames} frames")]
    ClipLongerThanVideo { video_id: String, clip_frames: u32, num_frames: u32 },
    #[error("cannot pad an empty batch")]
    EmptyBatch,
}

/// What to do with an online clip whose observed context already contains the event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PastEventPolicy {
    #[default]
    Discard,
    Background,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub stride: u32,
    pub clip_len_s: f64,
    pub aw_len_s: f64,
    pub overlap: f64,
    pub tau_a_s: f64,
    pub past_event_policy: PastEventPolicy,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            stride: 3,
            clip_len_s: 2.0,
            aw_len_s: 1.0,
            overlap: 0.5,
            tau_a_s: 0.5,
            past_event_policy: PastEventPolicy::Discard,
        }
    }
}

/// Online clip geometry in original frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClipGeometry {
    pub clip_frames: u32,
    pub aw_frames: u32,
    pub step: u32,
}

impl SamplingConfig {
    pub fn geometry(&self, fps: u32) -> Result<ClipGeometry, SamplingError> {
        if self.stride == 0 {
            return Err(SamplingError::InvalidStride);
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(SamplingError::InvalidConfig(format!("overlap {} not in [0, 1)", self.overlap)));
        }
        let fps = f64::from(fps);
        let clip = secs_to_frames(self.clip_len_s, fps);
        let aw = secs_to_frames(self.aw_len_s, fps);
        if clip < 1 || aw < 1 || !self.clip_len_s.is_finite() || !self.aw_len_s.is_finite() {
            return Err(SamplingError::InvalidConfig(format!(
                "clip {} s and anticipation window {} s must each span at least one frame",
                self.clip_len_s, self.aw_len_s
            )));
        }
        let clip_frames = u32::try_from(clip).map_err(|_| SamplingError::InvalidConfig("clip too long".into()))?;
        let aw_frames = u32::try_from(aw).map_err(|_| SamplingError::InvalidConfig("window too long".into()))?;
        let step = (f64::from(clip_frames) * (1.0 - self.overlap)).round_ties_even().max(1.0) as u32;
        Ok(ClipGeometry { clip_frames, aw_frames, step })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipKind {
    Offline,
    Online,
}

/// An observed context window `[start_frame, start_frame + context_len)`
/// followed by its anticipation window `[aw_start, aw_start + aw_len)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClipSample {
    pub video_id: String,
    pub start_frame: u32,
    pub context_len: u32,
    pub aw_start: u32,
    pub aw_len: u32,
    pub stride: u32,
    pub label: ClassLabel,
    pub kind: ClipKind,
}

impl ClipSample {
    pub fn context_end(&self) -> u32 {
        self.start_frame + self.context_len
    }

    /// Context frames kept after temporal striding.
    pub fn sampled_frame_indices(&self) -> Vec<u32> {
        (self.start_frame..self.context_end()).step_by(self.stride.max(1) as usize).collect()
    }
}

/// `{0, stride, 2*stride, ...}` below `num_frames`. The effective frame rate is `fps / stride`.
pub fn downsample_indices(num_frames: u32, stride: u32) -> Result<Vec<u32>, SamplingError> {
    if stride == 0 {
        return Err(SamplingError::InvalidStride);
    }
    Ok((0..num_frames).step_by(stride as usize).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrimOutcome {
    Clip(ClipSample),
    /// The event happens within the first `tau_a` of the video, leaving no context.
    Removed,
}

/// Offline trimming: the context runs from frame 0 up to (excluding)
/// `event_frame - round(tau_a * fps)`. The anticipation window spans the gap
/// up to and including the event frame.
pub fn trim_offline(
    video: &VideoMeta,
    gt: &GroundTruth,
    tau_a_s: f64,
    stride: u32,
) -> Result<TrimOutcome, SamplingError> {
    if stride == 0 {
        return Err(SamplingError::InvalidStride);
    }
    if !(tau_a_s >= 0.0) || !tau_a_s.is_finite() {
        return Err(SamplingError::InvalidConfig(format!("anticipation time {tau_a_s} must be non-negative")));
    }
    let tau = secs_to_frames(tau_a_s, f64::from(video.fps));
    let event = i64::from(gt.frame);
    if event <= tau {
        return Ok(TrimOutcome::Removed);
    }
    let context_len = (event - tau) as u32;
    Ok(TrimOutcome::Clip(ClipSample {
        video_id: video.id.clone(),
        start_frame: 0,
        context_len,
        aw_start: context_len,
        aw_len: gt.frame - context_len + 1,
        stride,
        label: gt.label,
        kind: ClipKind::Offline,
    }))
}

/// Exhaustive sliding-window sampling. Clips always lie inside the video;
/// the anticipation window may be truncated at the video end and is then
/// labelled on its truncated extent.
pub fn sample_online(
    video: &VideoMeta,
    gt: Option<&GroundTruth>,
    cfg: &SamplingConfig,
) -> Result<Vec<ClipSample>, SamplingError> {
    let geo = cfg.geometry(video.fps)?;
    if geo.clip_frames > video.num_frames {
        return Err(SamplingError::ClipLongerThanVideo {
            video_id: video.id.clone(),
            clip_frames: geo.clip_frames,
            num_frames: video.num_frames,
        });
    }
    let mut clips = Vec::new();
    let mut start = 0u32;
    while start + geo.clip_frames <= video.num_frames {
        let aw_start = start + geo.clip_frames;
        let aw_end = (aw_start + geo.aw_frames).min(video.num_frames);
        let label = match gt {
            Some(gt) if (aw_start..aw_end).contains(&gt.frame) => Some(gt.label),
            Some(gt) if (start..aw_start).contains(&gt.frame) => match cfg.past_event_policy {
                PastEventPolicy::Discard => None,
                PastEventPolicy::Background => Some(ClassLabel::Background),
            },
            _ => Some(ClassLabel::Background),
        };
        if let Some(label) = label {
            clips.push(ClipSample {
                video_id: video.id.clone(),
                start_frame: start,
                context_len: geo.clip_frames,
                aw_start,
                aw_len: aw_end - aw_start,
                stride: cfg.stride,
                label,
                kind: ClipKind::Online,
            });
        }
        start += geo.step;
    }
    Ok(clips)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Offline,
    Online,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusClips {
    pub clips: Vec<ClipSample>,
    /// Offline mode: videos whose event falls within the first `tau_a`.
    pub removed: Vec<String>,
    /// Online mode: videos shorter than one clip.
    pub too_short: Vec<String>,
}

/// Samples every timestamped video of `manifest`, in manifest order. Videos
/// are processed in parallel; the output does not depend on scheduling.
pub fn sample_corpus(manifest: &Manifest, cfg: &SamplingConfig, mode: SamplingMode) -> Result<CorpusClips, SamplingError> {
    if mode == SamplingMode::Online {
        // Surface config errors even when the manifest is empty.
        cfg.geometry(60)?;
    }
    let per_video: Vec<Result<(Vec<ClipSample>, Option<String>), SamplingError>> = manifest
        .entries()
        .par_iter()
        .filter_map(|e| e.ground_truth().map(|gt| (e, gt)))
        .map(|(entry, gt)| match mode {
            SamplingMode::Offline => match trim_offline(&entry.meta, &gt, cfg.tau_a_s, cfg.stride)? {
                TrimOutcome::Clip(c) => Ok((vec![c], None)),
                TrimOutcome::Removed => Ok((Vec::new(), Some(entry.meta.id.clone()))),
            },
            SamplingMode::Online => match sample_online(&entry.meta, Some(&gt), cfg) {
                Ok(clips) => Ok((clips, None)),
                Err(SamplingError::ClipLongerThanVideo { video_id, .. }) => Ok((Vec::new(), Some(video_id))),
                Err(e) => Err(e),
            },
        })
        .collect();
    let mut out = CorpusClips::default();
    for item in per_video {
        let (clips, dropped) = item?;
        out.clips.extend(clips);
        if let Some(id) = dropped {
            match mode {
                SamplingMode::Offline => out.removed.push(id),
                SamplingMode::Online => out.too_short.push(id),
            }
        }
    }
    Ok(out)
}

/// Left-padding plan for a batch of sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PaddedBatch {
    /// Frames prepended to each sequence.
    pub pads: Vec<usize>,
    pub padded_len: usize,
}

/// Pads every sequence at its start up to the longest one, aligning right edges.
pub fn pad_batch(lengths: &[usize]) -> Result<PaddedBatch, SamplingError> {
    let padded_len = *lengths.iter().max().ok_or(SamplingError::EmptyBatch)?;
    Ok(PaddedBatch { pads: lengths.iter().map(|&l| padded_len - l).collect(), padded_len })
}
