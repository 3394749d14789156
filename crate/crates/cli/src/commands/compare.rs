use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::Args;
use rebound_core::formats::{ballots, predictions};
use rebound_core::panel::{compare, majority_vote, PanelError};
use rebound_core::report::render_comparison;
use rebound_core::ClassLabel;
use serde::{Deserialize, Serialize};

use super::{absolute, load_manifest, Outputs};
use crate::error::{CliError, Result};

/// Majority-vote expert ballots and compare the panel with the model on the same videos.
#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Ground-truth classes.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model predictions, CSV `video_id,label`.
    #[arg(long)]
    pub ai: PathBuf,
    /// Ballot CSVs `expert_id,video_id,label`; one per expert or combined.
    #[arg(long, num_args = 1.., required = true)]
    pub ballots: Vec<PathBuf>,
    /// Ballots per video. Defaults to the number of distinct experts.
    #[arg(long)]
    pub panel_size: Option<usize>,
    /// Positive class of the single-row summary.
    #[arg(long, default_value = "OREB")]
    pub positive: ClassLabel,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareJob {
    pub manifest: PathBuf,
    pub ai: PathBuf,
    pub ballots: Vec<PathBuf>,
    pub panel_size: Option<usize>,
    pub positive: ClassLabel,
}

impl CompareArgs {
    pub fn resolve(self) -> Result<CompareJob> {
        if !self.positive.is_action() {
            return Err(CliError::config("--positive must be OREB or DREB"));
        }
        Ok(CompareJob {
            manifest: absolute(&self.manifest)?,
            ai: absolute(&self.ai)?,
            ballots: self.ballots.iter().map(|p| absolute(p)).collect::<Result<_>>()?,
            panel_size: self.panel_size,
            positive: self.positive,
        })
    }
}

fn panel_error(e: PanelError) -> CliError {
    match e {
        PanelError::EvenPanel(_) => CliError::config(e),
        PanelError::VideoSetMismatch(ids) => CliError::offending_ids("AI, panel and ground-truth video sets differ", &ids),
        other => CliError::validation(other),
    }
}

impl CompareJob {
    pub fn execute(&self, out: &mut Outputs) -> Result<()> {
        let m = load_manifest(&self.manifest, None)?;
        let ai = predictions::read(&self.ai)?;
        let b = ballots::read_all(&self.ballots)?;
        let panel_size = self.panel_size.unwrap_or_else(|| b.iter().map(|x| &x.expert_id).collect::<BTreeSet<_>>().len());
        let panel = majority_vote(&b, panel_size).map_err(panel_error)?;
        let trial: BTreeSet<&String> = ai.keys().chain(panel.decisions.keys()).collect();
        let mut gts = BTreeMap::new();
        let mut unlabeled = Vec::new();
        for id in trial {
            match m.get(id).and_then(|e| e.annotation.as_ref()).filter(|a| !a.is_mislabeled()).and_then(|a| a.label) {
                Some(l) => {
                    gts.insert(id.clone(), l);
                }
                None => unlabeled.push(id.clone()),
            }
        }
        if !unlabeled.is_empty() {
            return Err(CliError::offending_ids("videos without a ground-truth class", &unlabeled));
        }
        let c = compare(&ai, &panel, &gts, self.positive).map_err(panel_error)?;
        let text = render_comparison(&c);
        print!("{text}");
        out.write("panel.csv", &predictions::render(&panel.labels()))?;
        out.json("comparison.json", &c)?;
        out.write("comparison.txt", &text)
    }
}
