//! `cdma`: generate, optimize, evaluate and simulate spreading-sequence sets.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error. Output files are
//! only written after every computation of the command has succeeded.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::{Flags, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cdma", version, about = "Optimal spreading sequences for asynchronous CDMA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a Gold or random sequence set as JSON
    Generate(#[command(flatten)] Flags),
    /// Run the cyclic single-user optimization; writes the set and a trace CSV
    Optimize {
        #[command(flatten)]
        flags: Flags,
        /// Trace CSV path (defaults to <out stem>.trace.csv)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Per-user SINR, SIR, maximum SINR, capacity and bounds as CSV
    Metrics(#[command(flatten)] Flags),
    /// Monte-Carlo BER over an Eb/N0 grid as CSV
    Simulate(#[command(flatten)] Flags),
}

fn write_outputs(outputs: Vec<Output>) -> Result<(), CliError> {
    let mut staged = Vec::new();
    for out in &outputs {
        if let Some(path) = &out.path {
            let tmp = path.with_extension("partial");
            std::fs::write(&tmp, &out.contents)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
            staged.push((tmp, path.clone()));
        }
    }
    for (tmp, path) in staged {
        std::fs::rename(&tmp, &path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut stdout = std::io::stdout().lock();
    for out in outputs.iter().filter(|o| o.path.is_none()) {
        stdout
            .write_all(out.contents.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let outputs = match cli.command {
        Command::Generate(flags) => commands::generate(&RunConfig::resolve(flags)?)?,
        Command::Optimize { flags, trace } => commands::optimize(&RunConfig::resolve(flags)?, trace)?,
        Command::Metrics(flags) => commands::metrics(&RunConfig::resolve(flags)?)?,
        Command::Simulate(flags) => commands::simulate(&RunConfig::resolve(flags)?)?,
    };
    write_outputs(outputs)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdma: {e}");
            ExitCode::from(e.code())
        }
    }
}
