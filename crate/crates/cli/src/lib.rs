//! Command-line front end: JSON experiment configs in, CSV datasets and a
//! run manifest out.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use config::{ExperimentConfig, Overrides, Scale};
use error::CliError;
use output::{write_atomic, write_tables, Manifest};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outputs: Vec<output::OutputFile>,
}

fn record_failure(dir: &Path, err: &CliError) {
    let Ok(text) = serde_json::to_string_pretty(&err.record()) else {
        return;
    };
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = write_atomic(&dir.join("error.json"), format!("{text}\n").as_bytes());
    }
}

fn finish<C: serde::Serialize>(
    dir: &Path,
    command: &str,
    config: C,
    started: Instant,
    tables: &[output::Table],
) -> Result<RunSummary, CliError> {
    let outputs = write_tables(dir, tables)?;
    Manifest {
        tool: "acdd",
        version: VERSION,
        command: command.to_owned(),
        config,
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs: outputs.clone(),
    }
    .write(dir)?;
    let stale = dir.join("error.json");
    if stale.exists() {
        std::fs::remove_file(&stale).map_err(error::io_error(&stale))?;
    }
    Ok(RunSummary {
        out_dir: dir.to_owned(),
        outputs,
    })
}

/// Runs one config-driven command. On failure an `error.json` record is
/// left in the output directory.
pub fn run_config(
    path: &Path,
    overrides: Overrides,
    out: Option<PathBuf>,
) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let loaded = ExperimentConfig::load(path);
    let dir = out
        .or_else(|| loaded.as_ref().ok().and_then(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let result = loaded.and_then(|cfg| {
        let mut cfg = cfg.resolve(overrides)?;
        cfg.out = None;
        let tables = commands::execute(&mut cfg)?;
        finish(&dir, cfg.command().as_str(), &cfg, started, &tables)
    });
    if let Err(e) = &result {
        record_failure(&dir, e);
    }
    result
}

pub fn run_figure(
    figure: &str,
    scale: Scale,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let dir = out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT).join(figure));
    let result = figures::emit(figure, scale, seed)
        .and_then(|fig| finish(&dir, "figure", &fig.record, started, &fig.tables));
    if let Err(e) = &result {
        record_failure(&dir, e);
    }
    result
}
