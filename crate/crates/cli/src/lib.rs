//! `rebound` command-line tool: reproducible pipelines over the core
//! toolkit, plus the annotation server.

pub mod commands;
pub mod config;
pub mod error;
pub mod range;
pub mod record;
pub mod serve;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{compare, data, evaluate, postprocess, pseudo, sample, simulate, Job};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "rebound", version, about = "Rebound spotting and anticipation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Simulate(simulate::SimulateArgs),
    Validate(data::ValidateArgs),
    Split(data::SplitArgs),
    Sample(sample::SampleArgs),
    Postprocess(postprocess::PostprocessArgs),
    Evaluate(evaluate::EvaluateArgs),
    FilterPseudo(pseudo::FilterPseudoArgs),
    CompareExperts(compare::CompareArgs),
    /// Serve the annotation API over the data directory.
    Serve(ServeArgs),
    /// Re-execute a run record and check the outputs are byte-identical.
    Rerun(RerunArgs),
}

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    #[arg(long, env = "REBOUND_DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, clap::Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub record: PathBuf,
    /// Write here instead of the recorded output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn resolve(command: Command) -> Result<std::result::Result<(Job, PathBuf), Command>> {
    Ok(Ok(match command {
        Command::Simulate(a) => {
            let out = a.out.clone();
            (Job::Simulate(a.resolve()?), out)
        }
        Command::Validate(a) => {
            let out = a.out.clone();
            (Job::Validate(a.resolve()?), out)
        }
        Command::Split(a) => {
            let out = a.out.clone();
            (Job::Split(a.resolve()?), out)
        }
        Command::Sample(a) => {
            let out = a.out.clone();
            (Job::Sample(a.resolve()?), out)
        }
        Command::Postprocess(a) => {
            let out = a.out.clone();
            (Job::Postprocess(a.resolve()?), out)
        }
        Command::Evaluate(a) => {
            let out = a.out.clone();
            (Job::Evaluate(a.resolve()?), out)
        }
        Command::FilterPseudo(a) => {
            let out = a.out.clone();
            (Job::FilterPseudo(a.resolve()?), out)
        }
        Command::CompareExperts(a) => {
            let out = a.out.clone();
            (Job::CompareExperts(a.resolve()?), out)
        }
        other => return Ok(Err(other)),
    }))
}

pub fn dispatch(command: Command) -> Result<()> {
    match resolve(command)? {
        Ok((job, out)) => record::run_job(&job, &out).map(drop),
        Err(Command::Rerun(a)) => {
            let r = record::rerun(&a.record, a.out.as_deref())?;
            println!("rerun of {} reproduced {} outputs in {}", r.subcommand, r.outputs.len(), r.out_dir.display());
            Ok(())
        }
        Err(Command::Serve(a)) => {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::new(error::ErrorKind::Io, e))?;
            rt.block_on(serve::serve(&a.data_dir, a.port))
        }
        Err(_) => unreachable!("batch commands resolve to jobs"),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
/// Failures print a JSON error record on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                eprintln!("{}", CliError::config(e.kind()).to_json());
            }
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
