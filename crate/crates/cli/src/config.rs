//! Command-line flags, optional TOML config file, and their merge.
//!
//! Precedence: flags, then the config file, then built-in defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_N: usize = 31;
pub const DEFAULT_K: usize = 7;
pub const DEFAULT_P: f64 = 1.0;
pub const DEFAULT_TC: f64 = 1.0;
pub const DEFAULT_U: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Gold,
    Random,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
pub enum LogBaseArg {
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "e")]
    #[serde(rename = "e")]
    E,
}

/// Flags shared by every subcommand; each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with defaults for any of the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sequence length N
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of users K
    #[arg(long)]
    pub k: Option<usize>,
    /// Common signal power P
    #[arg(long)]
    pub p: Option<f64>,
    /// Chip duration Tc
    #[arg(long)]
    pub tc: Option<f64>,
    /// Noise parameter N0 (two-sided density N0/2)
    #[arg(long)]
    pub n0: Option<f64>,
    /// Eb/N0 in dB, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ebn0: Option<Vec<f64>>,
    /// Maximum number of sweeps L
    #[arg(long)]
    pub l: Option<usize>,
    /// Convergence threshold on per-user displacement (units of sqrt(N))
    #[arg(long)]
    pub eps: Option<f64>,
    /// Monte-Carlo trials per user and grid point
    #[arg(long)]
    pub u: Option<u64>,
    /// Random seed (required wherever randomness is used)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial sequences
    #[arg(long, value_enum)]
    pub init: Option<Init>,
    /// Input sequence-set file; `simulate` accepts it repeatedly as `label=path`
    #[arg(long = "in")]
    pub input: Vec<String>,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sweep counts at which to snapshot the optimizer, comma separated
    #[arg(long, value_delimiter = ',')]
    pub iterations: Option<Vec<usize>>,
    /// Logarithm base for capacity
    #[arg(long, value_enum)]
    pub log_base: Option<LogBaseArg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    k: Option<usize>,
    p: Option<f64>,
    tc: Option<f64>,
    n0: Option<f64>,
    ebn0: Option<Vec<f64>>,
    l: Option<usize>,
    eps: Option<f64>,
    u: Option<u64>,
    seed: Option<u64>,
    init: Option<Init>,
    #[serde(rename = "in")]
    input: Option<Vec<String>>,
    out: Option<PathBuf>,
    iterations: Option<Vec<usize>>,
    log_base: Option<LogBaseArg>,
}

/// Flags merged with the config file; defaults are applied by the accessors.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub p: f64,
    pub tc: f64,
    pub n0: Option<f64>,
    pub ebn0: Option<Vec<f64>>,
    pub l: usize,
    pub eps: f64,
    pub u: u64,
    pub seed: Option<u64>,
    pub init: Option<Init>,
    pub input: Vec<String>,
    pub out: Option<PathBuf>,
    pub iterations: Option<Vec<usize>>,
    pub log_base: LogBaseArg,
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        Ok(Self {
            n: flags.n.or(file.n),
            k: flags.k.or(file.k),
            p: flags.p.or(file.p).unwrap_or(DEFAULT_P),
            tc: flags.tc.or(file.tc).unwrap_or(DEFAULT_TC),
            n0: flags.n0.or(file.n0),
            ebn0: flags.ebn0.or(file.ebn0),
            l: flags.l.or(file.l).unwrap_or(cdma_core::optimizer::DEFAULT_SWEEPS),
            eps: flags.eps.or(file.eps).unwrap_or(cdma_core::optimizer::DEFAULT_EPS),
            u: flags.u.or(file.u).unwrap_or(DEFAULT_U),
            seed: flags.seed.or(file.seed),
            init: flags.init.or(file.init),
            input: if flags.input.is_empty() { file.input.unwrap_or_default() } else { flags.input },
            out: flags.out.or(file.out),
            iterations: flags.iterations.or(file.iterations),
            log_base: flags.log_base.or(file.log_base).unwrap_or(LogBaseArg::Two),
        })
    }

    pub fn seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config(format!("{what} needs --seed (there is no default seed)")))
    }

    pub fn single_input(&self) -> Result<&str, CliError> {
        match self.input.as_slice() {
            [one] => Ok(one),
            [] => Err(CliError::Config("missing --in".into())),
            _ => Err(CliError::Config("this command takes exactly one --in".into())),
        }
    }
}
