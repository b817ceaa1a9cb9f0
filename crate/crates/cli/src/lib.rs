//! Command implementations behind the `noisy-votes` binary.
//!
//! Every command is a plain function returning its output as text or rows, so
//! the binary, the integration tests and the acceptance suite share one code
//! path.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub mod args;
pub mod commands;
pub mod config;
pub mod curves;

pub use args::{Cli, Command};
pub use config::{OracleSpec, RawConfig, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config:\n{0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] noisy_votes::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 1 for usage and config problems, 2 for failures after validation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io { .. } => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn usage(err: impl std::fmt::Display) -> CliError {
    CliError::Usage(err.to_string())
}

pub(crate) fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub(crate) fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_at(dir))?;
            }
            fs::write(p, text).map_err(io_at(p))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a parsed command line, inside a dedicated pool when `--threads` is set.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.threads {
        None => commands::dispatch(cli.command),
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(usage)?;
            pool.install(|| commands::dispatch(cli.command))
        }
    }
}
