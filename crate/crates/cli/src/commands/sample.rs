use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rebound_core::formats::clips;
use rebound_core::sampling::{sample_corpus, PastEventPolicy, SamplingConfig, SamplingMode};
use serde::{Deserialize, Serialize};

use super::{absolute, load_manifest, Outputs, Subset, SubsetSel};
use crate::config::{flag, FileConfig};
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ModeArg {
    Offline,
    Online,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum PolicyArg {
    Discard,
    Background,
}

/// Cut anticipation clips: one trimmed clip per video (offline) or sliding windows (online).
#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub subset: Option<Subset>,
    /// Temporal stride. Defaults to 5 offline and 3 online.
    #[arg(long)]
    pub stride: Option<u32>,
    /// Online clip length in seconds.
    #[arg(long)]
    pub clip_len: Option<f64>,
    /// Online anticipation window in seconds.
    #[arg(long)]
    pub aw: Option<f64>,
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Offline anticipation time in seconds.
    #[arg(long)]
    pub tau_a: Option<f64>,
    #[arg(long, value_enum)]
    pub past_event_policy: Option<PolicyArg>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleJob {
    pub manifest: PathBuf,
    pub subset: Option<SubsetSel>,
    pub mode: SamplingMode,
    pub config: SamplingConfig,
}

impl SampleArgs {
    pub fn resolve(self) -> Result<SampleJob> {
        let mode = match self.mode {
            ModeArg::Offline => SamplingMode::Offline,
            ModeArg::Online => SamplingMode::Online,
        };
        let mut base = SamplingConfig::default();
        if mode == SamplingMode::Offline {
            base.stride = 5;
        }
        let mut c = FileConfig::load(self.config.as_deref())?.layer("sampling", base)?;
        flag(&mut c.stride, self.stride);
        flag(&mut c.clip_len_s, self.clip_len);
        flag(&mut c.aw_len_s, self.aw);
        flag(&mut c.overlap, self.overlap);
        flag(&mut c.tau_a_s, self.tau_a);
        flag(
            &mut c.past_event_policy,
            self.past_event_policy.map(|p| match p {
                PolicyArg::Discard => PastEventPolicy::Discard,
                PolicyArg::Background => PastEventPolicy::Background,
            }),
        );
        if mode == SamplingMode::Online {
            c.geometry(60).map_err(CliError::config)?;
        }
        if c.stride == 0 || !(c.tau_a_s >= 0.0 && c.tau_a_s.is_finite()) {
            return Err(CliError::config("stride must be positive and tau_a non-negative"));
        }
        Ok(SampleJob {
            manifest: absolute(&self.manifest)?,
            subset: SubsetSel::resolve(self.split, self.subset)?,
            mode,
            config: c,
        })
    }
}

#[derive(Serialize)]
struct SampleStats<'a> {
    mode: SamplingMode,
    clips: usize,
    per_label: BTreeMap<&'static str, usize>,
    removed: &'a [String],
    too_short: &'a [String],
}

impl SampleJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = load_manifest(&self.manifest, self.subset.as_ref())?;
        let corpus = sample_corpus(&m, &self.config, self.mode).map_err(CliError::config)?;
        let mut per_label = BTreeMap::new();
        for c in &corpus.clips {
            *per_label.entry(c.label.as_str()).or_default() += 1;
        }
        println!("{} clips, {} removed, {} too short", corpus.clips.len(), corpus.removed.len(), corpus.too_short.len());
        out.write("clips.jsonl", &clips::render(&corpus.clips))?;
        out.json(
            "sampling_stats.json",
            &SampleStats {
                mode: self.mode,
                clips: corpus.clips.len(),
                per_label,
                removed: &corpus.removed,
                too_short: &corpus.too_short,
            },
        )
    }
}
