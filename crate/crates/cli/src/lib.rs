//! Experiment runner for the `sphere-nodal` library: parses a
//! [`RunConfig`], runs one command and renders its table as CSV or JSON.

mod commands;
mod config;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser};

pub use commands::{run_command, MC_COLUMNS};
pub use config::{CommandKind, Format, KernelChoice, RunConfig};
pub use table::{Cell, Table, SCHEMA_VERSION};

/// Environment variable with the default worker count.
pub const WORKERS_ENV: &str = "SPHERE_NODAL_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{error} ({context})")]
    Module { error: sphere_nodal::Error, context: String },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sphere-nodal", version, about = "Nodal statistics of random spherical harmonics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandKind>,
    #[command(flatten)]
    pub flags: Flags,
}

/// Command-line overrides; unset flags fall back to the config file and then
/// to the defaults.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON file with any subset of the run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Degree or comma-separated sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, global = true)]
    pub mesh_level: Option<u32>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub mc_paths: Option<u32>,
    #[arg(long, global = true)]
    pub eps0: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub kernel: Option<KernelChoice>,
    #[arg(long, global = true)]
    pub points: Option<u32>,
    #[arg(long, global = true)]
    pub panels_per_oscillation: Option<u32>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; defaults to the SPHERE_NODAL_WORKERS variable.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

impl Cli {
    /// Defaults, then the config file, then the flags.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let f = &self.flags;
        let mut c = match &f.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if self.command.is_some() {
            c.command = self.command;
        }
        macro_rules! set {
            ($($field:ident <- $flag:ident),*) => {
                $(if let Some(v) = f.$flag.clone() { c.$field = v; })*
            };
        }
        set!(m <- m, n <- n, mesh_level <- mesh_level, samples <- samples, seed <- seed, mc_paths <- mc_paths,
            eps0 <- eps0, kernel <- kernel, points <- points, panels_per_oscillation <- panels_per_oscillation,
            format <- format);
        if f.output.is_some() {
            c.output_path = f.output.clone();
        }
        c.resolved()
    }
}

/// Runs a resolved configuration and returns the rendered artifact.
pub fn render(config: &RunConfig) -> Result<String, CliError> {
    let table = run_command(config)?;
    Ok(match config.format {
        Format::Csv => table.to_csv(config),
        Format::Json => table.to_json(config),
    })
}

/// Worker count from the flag, else from [`WORKERS_ENV`].
pub fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} = {v:?} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}
