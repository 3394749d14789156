use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rebound_core::formats::{detections, manifest};
use rebound_core::pseudolabel::{run_filter, PseudoError, PseudoFilterConfig};
use rebound_core::{ClassLabel, VideoMeta};
use serde::{Deserialize, Serialize};

use super::{absolute, load_manifest, Outputs};
use crate::config::{flag, FileConfig};
use crate::error::{CliError, Result};

/// Keep single, confident, class-consistent detections as pseudo-labels and balance the classes.
#[derive(Debug, Args)]
pub struct FilterPseudoArgs {
    /// Scraped videos; each needs a class label, timestamps are not used.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub min_confidence: Option<f64>,
    #[arg(long)]
    pub max_detections: Option<usize>,
    /// Keep every survivor instead of subsampling the larger class.
    #[arg(long)]
    pub no_balance: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterPseudoJob {
    pub manifest: PathBuf,
    pub detections: PathBuf,
    pub config: PseudoFilterConfig,
}

impl FilterPseudoArgs {
    pub fn resolve(self) -> Result<FilterPseudoJob> {
        let mut c = FileConfig::load(self.config.as_deref())?.layer("pseudo", PseudoFilterConfig::default())?;
        flag(&mut c.min_confidence, self.min_confidence);
        flag(&mut c.max_detections_per_video, self.max_detections);
        flag(&mut c.seed, self.seed);
        if self.no_balance {
            c.balance = false;
        }
        if !(c.min_confidence >= 0.0) {
            return Err(CliError::config(format!("min_confidence {} must be non-negative", c.min_confidence)));
        }
        Ok(FilterPseudoJob { manifest: absolute(&self.manifest)?, detections: absolute(&self.detections)?, config: c })
    }
}

impl FilterPseudoJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = load_manifest(&self.manifest, None)?;
        let dets = detections::read(&self.detections)?;
        let videos: Vec<VideoMeta> = m.videos().cloned().collect();
        let classes: BTreeMap<String, ClassLabel> = m
            .entries()
            .iter()
            .filter_map(|e| e.annotation.as_ref().filter(|a| !a.is_mislabeled()).and_then(|a| a.label).map(|l| (e.meta.id.clone(), l)))
            .collect();
        let result = run_filter(&dets, &videos, &classes, &self.config).map_err(|e| match e {
            PseudoError::UnknownVideos(ids) => CliError::offending_ids("detections for videos without a scraped class", &ids),
            other => CliError::validation(other),
        })?;
        let s = &result.stats;
        println!(
            "{} videos: {} empty, {} multiple, {} low confidence, {} class conflict; kept {}",
            s.input,
            s.rejected_empty,
            s.rejected_multi,
            s.rejected_conf,
            s.rejected_conflict,
            result.manifest.len()
        );
        out.write("pseudo_manifest.jsonl", &manifest::render(&result.manifest))?;
        out.json("pseudo_stats.json", &result.stats)
    }
}
