//! Run records: every job writes `run_record.<subcommand>.json` next to its
//! outputs, holding the resolved job and a digest of each output so a rerun
//! can be checked byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Job;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subcommand: String,
    pub version: String,
    pub job: Job,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub outputs: Vec<OutputDigest>,
    pub seed: Option<u64>,
    pub started_at: String,
    pub wall_clock_ms: u64,
}

pub fn record_name(subcommand: &str) -> String {
    format!("run_record.{subcommand}.json")
}

pub fn digest(dir: &Path, rel: &str) -> Result<OutputDigest> {
    let path = dir.join(rel);
    let data = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(OutputDigest { path: rel.to_string(), bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(&data)) })
}

/// Executes `job` into `out` and writes its run record there.
pub fn run_job(job: &Job, out: &Path) -> Result<RunRecord> {
    let out = crate::commands::absolute(out)?;
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let clock = Instant::now();
    let written = job.execute(&out)?;
    let outputs = written.iter().map(|rel| digest(&out, rel)).collect::<Result<Vec<_>>>()?;
    let record = RunRecord {
        subcommand: job.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        job: job.clone(),
        inputs: job.inputs(),
        out_dir: out.clone(),
        outputs,
        seed: job.seed(),
        started_at,
        wall_clock_ms: clock.elapsed().as_millis() as u64,
    };
    let path = out.join(record_name(job.name()));
    let mut text = serde_json::to_string_pretty(&record).expect("record serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(record)
}

pub fn parse_record(text: &str) -> Result<RunRecord> {
    serde_json::from_str(text).map_err(|e| CliError::validation(format!("run record: {e}")))
}

pub fn read_record(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_record(&text).map_err(|e| e.with_context(path))
}

/// Re-executes a recorded job, by default into its original directory, and
/// fails if any output differs from the recorded digests.
pub fn rerun(record_path: &Path, out: Option<&Path>) -> Result<RunRecord> {
    let old = read_record(record_path)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| old.out_dir.clone());
    let new = run_job(&old.job, &dir)?;
    let mut differ: Vec<String> = Vec::new();
    for d in &old.outputs {
        if !new.outputs.contains(d) {
            differ.push(d.path.clone());
        }
    }
    for d in &new.outputs {
        if !old.outputs.iter().any(|o| o.path == d.path) {
            differ.push(d.path.clone());
        }
    }
    if !differ.is_empty() {
        return Err(CliError::offending_ids("rerun outputs differ from the record", &differ));
    }
    Ok(new)
}
