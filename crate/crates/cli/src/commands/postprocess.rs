use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rebound_core::formats::{detections, scores};
use rebound_core::postprocess::{run_pipeline, NmsMode, PostProcessConfig};
use rebound_core::Detection;
use serde::{Deserialize, Serialize};

use super::{absolute, load_manifest, Outputs};
use crate::config::{flag, FileConfig};
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum NmsArg {
    Joint,
    PerClass,
}

/// Turn per-frame score tables into spotted events.
#[derive(Debug, Args)]
pub struct PostprocessArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding `<video_id>.csv` for every manifest video.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub smooth: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// NMS window in seconds.
    #[arg(long)]
    pub nms_window: Option<f64>,
    #[arg(long, value_enum)]
    pub nms_mode: Option<NmsArg>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostprocessJob {
    pub manifest: PathBuf,
    pub scores: PathBuf,
    pub config: PostProcessConfig,
}

impl PostprocessArgs {
    pub fn resolve(self) -> Result<PostprocessJob> {
        let mut c = FileConfig::load(self.config.as_deref())?.layer("postprocess", PostProcessConfig::default())?;
        flag(&mut c.smooth_window, self.smooth);
        flag(&mut c.threshold, self.threshold);
        flag(&mut c.nms_window_s, self.nms_window);
        flag(
            &mut c.nms_mode,
            self.nms_mode.map(|m| match m {
                NmsArg::Joint => NmsMode::Joint,
                NmsArg::PerClass => NmsMode::PerClass,
            }),
        );
        c.validate().map_err(CliError::config)?;
        Ok(PostprocessJob { manifest: absolute(&self.manifest)?, scores: absolute(&self.scores)?, config: c })
    }
}

#[derive(Serialize)]
struct PostprocessStats {
    videos: usize,
    detections: usize,
    per_class: BTreeMap<&'static str, usize>,
    videos_without_detection: usize,
}

impl PostprocessJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = load_manifest(&self.manifest, None)?;
        let mut all: Vec<Detection> = Vec::new();
        let mut empty = 0;
        for v in m.videos() {
            let path = self.scores.join(format!("{}.csv", v.id));
            let stream = scores::read(&path, &v.id, f64::from(v.fps), 1)
                .map_err(|e| CliError::from(e).with_context(&path))?;
            let dets = run_pipeline(&stream, &self.config).map_err(CliError::config)?;
            empty += usize::from(dets.is_empty());
            all.extend(dets);
        }
        let mut per_class = BTreeMap::new();
        for d in &all {
            *per_class.entry(d.label.as_str()).or_default() += 1;
        }
        println!("{} detections over {} videos", all.len(), m.len());
        out.write("detections.jsonl", &detections::render(&all))?;
        out.json(
            "postprocess_stats.json",
            &PostprocessStats { videos: m.len(), detections: all.len(), per_class, videos_without_detection: empty },
        )
    }
}
