use std::path::PathBuf;

use clap::Args;
use rebound_core::formats::{manifest, scores, truth};
use rebound_core::sim::{gen_corpus, BumpShape, SimConfig};
use serde::{Deserialize, Serialize};

use super::Outputs;
use crate::config::{flag, FileConfig};
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ShapeArg {
    Triangular,
    Gaussian,
    FlatTop,
}

impl From<ShapeArg> for BumpShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Triangular => BumpShape::Triangular,
            ShapeArg::Gaussian => BumpShape::Gaussian,
            ShapeArg::FlatTop => BumpShape::FlatTop,
        }
    }
}

/// Generate a synthetic corpus: manifest, per-video score tables and the oracle truth file.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of videos.
    #[arg(long = "n")]
    pub num_videos: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub fps: Option<u32>,
    #[arg(long)]
    pub min_duration: Option<f64>,
    #[arg(long)]
    pub max_duration: Option<f64>,
    #[arg(long)]
    pub oreb_fraction: Option<f64>,
    #[arg(long)]
    pub placement_lo: Option<f64>,
    #[arg(long)]
    pub placement_hi: Option<f64>,
    #[arg(long)]
    pub peak: Option<f64>,
    /// Bump half-width in frames.
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long, value_enum)]
    pub shape: Option<ShapeArg>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Probability of one spurious bump per video.
    #[arg(long)]
    pub spurious_prob: Option<f64>,
    /// Temporal stride of the written score tables.
    #[arg(long)]
    pub stride: Option<u32>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateJob {
    pub config: SimConfig,
}

impl SimulateArgs {
    pub fn resolve(self) -> Result<SimulateJob> {
        let file = FileConfig::load(self.config.as_deref())?;
        let mut c = file.layer("sim", SimConfig::default())?;
        flag(&mut c.num_videos, self.num_videos);
        flag(&mut c.seed, self.seed);
        flag(&mut c.fps, self.fps);
        flag(&mut c.min_duration_s, self.min_duration);
        flag(&mut c.max_duration_s, self.max_duration);
        flag(&mut c.oreb_fraction, self.oreb_fraction);
        flag(&mut c.placement_lo, self.placement_lo);
        flag(&mut c.placement_hi, self.placement_hi);
        flag(&mut c.peak, self.peak);
        flag(&mut c.width, self.width);
        flag(&mut c.shape, self.shape.map(Into::into));
        flag(&mut c.noise, self.noise);
        flag(&mut c.spurious_prob, self.spurious_prob);
        flag(&mut c.stride, self.stride);
        c.validate().map_err(CliError::config)?;
        Ok(SimulateJob { config: c })
    }
}

impl SimulateJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let corpus = gen_corpus(&self.config).map_err(CliError::config)?;
        out.write("manifest.jsonl", &manifest::render(&corpus.manifest))?;
        out.write("truth.jsonl", &truth::render(&corpus.truth))?;
        for s in &corpus.streams {
            out.write(&format!("scores/{}.csv", s.video_id()), &scores::render(s))?;
        }
        println!("simulated {} videos, {} truth events", corpus.manifest.len(), corpus.truth.len());
        Ok(())
    }
}
