//! Configuration-driven command line for the vortex-moduli numerical
//! core: critical-point tables, gradient flow runs with snapshot/resume,
//! connecting-orbit searches, Morse complex reports, trajectory audits
//! and hypothesis probes.
//!
//! All commands share one contract: outputs are deterministic byte for
//! byte for a fixed configuration and seed, every run directory contains
//! the resolved configuration, and files are written atomically.

pub mod commands;
pub mod config;
pub mod formats;
pub mod runs;

/// Command-line failure carrying the process exit code.
///
/// Exit codes are a stable contract: `2` for configuration, stability or
/// validation problems; `3` for I/O failures; `4` for search failures
/// (no solution found).  Success is `0`.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Search(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Search(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) | CliError::Search(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<vortexlab_core::Error> for CliError {
    fn from(err: vortexlab_core::Error) -> Self {
        match err {
            vortexlab_core::Error::SearchFailed { .. } => CliError::Search(format!("{err}")),
            // Everything else the core can report traces back to invalid
            // parameters, grids or stability limits.
            _ => CliError::Usage(format!("{err}")),
        }
    }
}

/// Print a report line unless `--quiet` was given.
pub(crate) fn say(quiet: bool, line: &str) {
    if !quiet {
        println!("{line}");
    }
}
