use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rebound_core::data::{check_disjoint, make_splits, validate_annotations, SplitSizes};
use rebound_core::formats::{manifest, splits};
use serde::{Deserialize, Serialize};

use super::{absolute, Outputs};
use crate::error::{CliError, Result};

/// Check a manifest and report valid, excluded and unannotated videos.
#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateJob {
    pub manifest: PathBuf,
}

impl ValidateArgs {
    pub fn resolve(self) -> Result<ValidateJob> {
        Ok(ValidateJob { manifest: absolute(&self.manifest)? })
    }
}

impl ValidateJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = manifest::read(&self.manifest)?;
        let report = validate_annotations(&m);
        println!(
            "{} videos: {} valid, {} excluded, {} unannotated",
            report.nominal,
            report.valid,
            report.excluded.len(),
            report.unannotated.len()
        );
        out.json("validation.json", &report)
    }
}

/// Draw seeded, disjoint train/val/test splits.
#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "split")]
    pub name: String,
    #[arg(long, default_value_t = 0)]
    pub train: usize,
    #[arg(long, default_value_t = 0)]
    pub val: usize,
    #[arg(long, default_value_t = 0)]
    pub test: usize,
    /// Per-class quotas within one video of each other in every split.
    #[arg(long)]
    pub balanced: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Existing split files the new split must not share any video with.
    #[arg(long = "disjoint-from")]
    pub disjoint_from: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitJob {
    pub manifest: PathBuf,
    pub name: String,
    pub sizes: SplitSizes,
    pub balanced: bool,
    pub seed: u64,
    pub disjoint_from: Vec<PathBuf>,
}

impl SplitArgs {
    pub fn resolve(self) -> Result<SplitJob> {
        Ok(SplitJob {
            manifest: absolute(&self.manifest)?,
            name: self.name,
            sizes: SplitSizes::new(self.train, self.val, self.test),
            balanced: self.balanced,
            seed: self.seed,
            disjoint_from: self.disjoint_from.iter().map(|p| absolute(p)).collect::<Result<_>>()?,
        })
    }
}

#[derive(Serialize)]
struct SplitCounts {
    name: String,
    seed: u64,
    counts: BTreeMap<&'static str, BTreeMap<&'static str, usize>>,
}

impl SplitJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = manifest::read(&self.manifest)?;
        let split = make_splits(&m, self.name.clone(), self.sizes, self.balanced, self.seed).map_err(CliError::validation)?;
        for other in &self.disjoint_from {
            let existing = splits::read(other)?;
            let shared = check_disjoint(split.all_ids(), existing.all_ids());
            if !shared.is_empty() {
                return Err(CliError::offending_ids(format!("split overlaps {}", other.display()), &shared));
            }
        }
        let counts = split
            .class_counts(&m)
            .into_iter()
            .map(|(k, c)| (k, BTreeMap::from([("DREB", c.dreb), ("OREB", c.oreb)])))
            .collect();
        println!("split {:?}: train {}, val {}, test {}", split.name, split.train.len(), split.val.len(), split.test.len());
        out.write("split.json", &splits::render(&split))?;
        out.json("split_counts.json", &SplitCounts { name: split.name.clone(), seed: split.seed, counts })
    }
}
