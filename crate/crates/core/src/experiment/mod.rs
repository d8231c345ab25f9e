//! Reproducible experiment runner behind the command-line interface.

mod commands;
mod config;
mod report;

use std::fs;
use std::time::Instant;

pub use config::{parse_key_values, parse_workers, Command, ExperimentConfig, KeySpec, WORKERS_ENV};
pub use report::{Check, ExperimentReport, Table};

use crate::error::{Error, Result};

/// Worker count: explicit setting, then the environment, then rayon's default.
pub fn resolve_workers(cfg: &ExperimentConfig) -> Result<Option<usize>> {
    if let Some(w) = cfg.workers {
        return Ok(Some(w));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => parse_workers(&v).map(Some),
        _ => Ok(None),
    }
}

/// Runs one experiment on a dedicated thread pool.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = resolve_workers(cfg)? {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut report = pool.install(|| commands::dispatch(cfg))?;
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Writes `<out>.csv` and `<out>.json`.
pub fn write_outputs(report: &ExperimentReport, out: &std::path::Path) -> Result<()> {
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(out.with_extension("csv"), report.to_csv())?;
    fs::write(out.with_extension("json"), report.summary_json())?;
    Ok(())
}
