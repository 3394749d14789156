//! One module per subcommand. Each turns its clap arguments into a fully
//! resolved job (absolute paths, merged config) that can be serialized into
//! the run record and executed again later.

pub mod compare;
pub mod data;
pub mod evaluate;
pub mod postprocess;
pub mod pseudo;
pub mod sample;
pub mod simulate;

use std::fs;
use std::path::{Path, PathBuf};

use rebound_core::data::SplitSet;
use rebound_core::formats::{manifest, splits};
use rebound_core::Manifest;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Job {
    Simulate(simulate::SimulateJob),
    Validate(data::ValidateJob),
    Split(data::SplitJob),
    Sample(sample::SampleJob),
    Postprocess(postprocess::PostprocessJob),
    Evaluate(evaluate::EvaluateJob),
    FilterPseudo(pseudo::FilterPseudoJob),
    CompareExperts(compare::CompareJob),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Simulate(_) => "simulate",
            Job::Validate(_) => "validate",
            Job::Split(_) => "split",
            Job::Sample(_) => "sample",
            Job::Postprocess(_) => "postprocess",
            Job::Evaluate(_) => "evaluate",
            Job::FilterPseudo(_) => "filter-pseudo",
            Job::CompareExperts(_) => "compare-experts",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Simulate(j) => Some(j.config.seed),
            Job::Split(j) => Some(j.seed),
            Job::FilterPseudo(j) => Some(j.config.seed),
            _ => None,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Job::Simulate(_) => Vec::new(),
            Job::Validate(j) => vec![j.manifest.clone()],
            Job::Split(j) => std::iter::once(j.manifest.clone()).chain(j.disjoint_from.iter().cloned()).collect(),
            Job::Sample(j) => std::iter::once(j.manifest.clone()).chain(j.subset.as_ref().map(|s| s.split.clone())).collect(),
            Job::Postprocess(j) => vec![j.manifest.clone(), j.scores.clone()],
            Job::Evaluate(j) => [Some(&j.manifest), j.detections.as_ref(), j.predictions.as_ref(), j.subset.as_ref().map(|s| &s.split)]
                .into_iter()
                .flatten()
                .cloned()
                .collect(),
            Job::FilterPseudo(j) => vec![j.manifest.clone(), j.detections.clone()],
            Job::CompareExperts(j) => [j.manifest.clone(), j.ai.clone()].into_iter().chain(j.ballots.iter().cloned()).collect(),
        }
    }

    /// Runs the job, writing into `out`. Returns output paths relative to `out`.
    pub fn execute(&self, out: &Path) -> Result<Vec<String>> {
        let mut w = Outputs::new(out);
        match self {
            Job::Simulate(j) => j.execute(&mut w)?,
            Job::Validate(j) => j.execute(&mut w)?,
            Job::Split(j) => j.execute(&mut w)?,
            Job::Sample(j) => j.execute(&mut w)?,
            Job::Postprocess(j) => j.execute(&mut w)?,
            Job::Evaluate(j) => j.execute(&mut w)?,
            Job::FilterPseudo(j) => j.execute(&mut w)?,
            Job::CompareExperts(j) => j.execute(&mut w)?,
        }
        Ok(w.written)
    }
}

/// Collects the files a job writes.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs { dir: dir.to_path_buf(), written: Vec::new() }
    }

    pub fn write(&mut self, rel: &str, content: &str) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.written.push(rel.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(rel, &text)
    }
}

/// Absolute form of a user-supplied path, so records stay valid from any cwd.
pub fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| CliError::io(p, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    Train,
    Val,
    Test,
}

/// Restricts a manifest to one split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSel {
    pub split: PathBuf,
    pub subset: Subset,
}

impl SubsetSel {
    pub fn resolve(split: Option<PathBuf>, subset: Option<Subset>) -> Result<Option<SubsetSel>> {
        match (split, subset) {
            (None, None) => Ok(None),
            (Some(split), subset) => Ok(Some(SubsetSel { split: absolute(&split)?, subset: subset.unwrap_or(Subset::Test) })),
            (None, Some(_)) => Err(CliError::config("--subset requires --split")),
        }
    }

    pub fn ids(split: &SplitSet, subset: Subset) -> &[String] {
        match subset {
            Subset::Train => &split.train,
            Subset::Val => &split.val,
            Subset::Test => &split.test,
        }
    }
}

/// Loads a manifest, optionally restricted to one split's videos.
pub fn load_manifest(path: &Path, sel: Option<&SubsetSel>) -> Result<Manifest> {
    let m = manifest::read(path)?;
    let Some(sel) = sel else { return Ok(m) };
    let split = splits::read(&sel.split)?;
    let ids = SubsetSel::ids(&split, sel.subset);
    let missing: Vec<String> = ids.iter().filter(|id| !m.contains(id)).cloned().collect();
    if !missing.is_empty() {
        return Err(CliError::offending_ids("split references videos missing from the manifest", &missing));
    }
    let keep: std::collections::BTreeSet<&String> = ids.iter().collect();
    let entries = m.entries().iter().filter(|e| keep.contains(&e.meta.id)).cloned();
    Manifest::new(entries).map_err(CliError::validation)
}
