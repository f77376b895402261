//! Configuration files, result records, sample CSV files and output locking.

mod config;
mod record;
mod samples;

pub use config::{ExperimentConfig, OutputConfig};
pub use record::{content_hash, export_config, run_config, OutputLock, ResultRecord, RunOutcome, RECORD_SCHEMA_VERSION};
pub use samples::{export_samples, import_samples, write_curve, ImportedBatch, SAMPLE_COLUMNS};

use std::path::PathBuf;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "BHLAB_OUT";

/// Output root: the flag, then the config, then `BHLAB_OUT`, then `bhlab-out`.
pub fn output_root(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bhlab-out"))
}

#[cfg(test)]
mod tests;
