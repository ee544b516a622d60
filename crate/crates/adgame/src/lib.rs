//! Sweeps, verification and simulation for the targeted-advertising privacy
//! game, with CSV and SVG output. The numerics live in `adgame-core`; this
//! crate adds files, threads and the command line.

use std::path::PathBuf;

pub mod config;
pub mod simulate;
pub mod svg;
pub mod sweep;
pub mod table;
pub mod verify;

pub use config::{ConfigError, RunConfig};

/// Exit code for a successful run.
pub const EXIT_OK: u8 = 0;
/// Exit code for a failed property or an IO problem.
pub const EXIT_FAILURE: u8 = 1;
/// Exit code for a bad config or a model that violates the assumptions.
pub const EXIT_INVALID: u8 = 2;
/// Exit code for a solve that found no equilibrium.
pub const EXIT_NO_EQUILIBRIUM: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] adgame_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed table: {0}")]
    Format(String),
    #[error("model violates the standing assumptions:\n{0}")]
    Validation(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Validation(_) => EXIT_INVALID,
            _ => EXIT_FAILURE,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks the configured model against the standing assumptions.
pub fn validate_model(cfg: &RunConfig) -> Result<()> {
    let report = cfg.game.validate(cfg.validation_grid);
    if report.is_ok() {
        return Ok(());
    }
    let lines: Vec<String> = report
        .violations
        .iter()
        .take(10)
        .map(|v| match v.at {
            Some(x) => format!("  {:?} at v = {x} (value {})", v.check, v.value),
            None => format!("  {:?} (value {})", v.check, v.value),
        })
        .collect();
    let more = report.violations.len().saturating_sub(lines.len());
    let mut msg = lines.join("\n");
    if more > 0 {
        msg.push_str(&format!("\n  ... and {more} more"));
    }
    Err(Error::Validation(msg))
}
