use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use super::config::ExperimentConfig;
use super::samples::{export_samples, write_curve};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, ExitTailParams, Overrides, Report, Study};

pub const RECORD_SCHEMA_VERSION: u32 = 1;

/// What a run produced, keyed by the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: String,
    pub config_hash: String,
    /// Git-style blob hash (SHA-256 of `blob <len>\0<bytes>`) of the config file.
    pub input_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub passed: bool,
    /// Report metrics, with oracle values under `oracle.`.
    pub metrics: BTreeMap<String, f64>,
    pub metrics_hash: String,
    pub artifacts: Vec<PathBuf>,
}

/// Git-style content hash of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

fn now() -> String {
    OffsetDateTime::now_utc().format(&Rfc3339).expect("RFC 3339 formats any UTC time")
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub const FILE: &'static str = ".bhlab.lock";

    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(Self::FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(OutputLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Io(std::io::Error::new(
                e.kind(),
                format!("{} is held by another run; remove it if that run is gone", path.display()),
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub record: ResultRecord,
    pub report: Report,
    pub dir: PathBuf,
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, v).map_err(std::io::Error::from)?;
    writeln!(f)?;
    Ok(())
}

/// Runs `cfg` and writes `report.json`, `record.json` and one CSV per curve
/// into `<root>/<experiment>-<hash prefix>/`; the record lists every file but
/// itself. `input` is the config file text.
pub fn run_config(cfg: &ExperimentConfig, input: &[u8], ov: &Overrides, root: &Path) -> Result<RunOutcome> {
    let config_hash = cfg.hash(ov)?;
    let _lock = OutputLock::acquire(root)?;
    let started_at = now();
    let report = run_experiment(&cfg.experiment, cfg.params_json()?, ov, &cfg.context())?;
    let finished_at = now();

    let dir = root.join(format!("{}-{}", cfg.experiment, &config_hash[..12]));
    fs::create_dir_all(&dir)?;
    let mut artifacts = Vec::new();
    let report_path = dir.join("report.json");
    let mut doc = serde_json::to_value(&report).map_err(std::io::Error::from)?;
    doc["config_hash"] = config_hash.clone().into();
    write_json(&report_path, &doc)?;
    artifacts.push(report_path);
    for (name, curve) in &report.curves {
        let p = dir.join(format!("{name}.csv"));
        write_curve(curve, &p, &config_hash)?;
        artifacts.push(p);
    }

    let mut metrics = report.metrics.clone();
    metrics.extend(report.oracles.iter().map(|(k, v)| (format!("oracle.{k}"), *v)));
    let record = ResultRecord {
        schema_version: RECORD_SCHEMA_VERSION,
        experiment: cfg.experiment.clone(),
        config_hash,
        input_hash: content_hash(input),
        started_at,
        finished_at,
        passed: report.passed(),
        metrics,
        metrics_hash: report.metrics_hash(),
        artifacts: artifacts.clone(),
    };
    write_json(&dir.join("record.json"), &record)?;
    Ok(RunOutcome { record, report, dir })
}

/// Samples the batch of an `exit-tail` config and writes it to
/// `<root>/<experiment>-<hash prefix>/samples.csv`. Returns the path and any
/// warnings.
pub fn export_config(cfg: &ExperimentConfig, ov: &Overrides, root: &Path) -> Result<(PathBuf, Vec<String>)> {
    if cfg.experiment != ExitTailParams::NAME {
        return Err(Error::config(
            "experiment",
            format!("export samples from an '{}' config, got '{}'", ExitTailParams::NAME, cfg.experiment),
        ));
    }
    let config_hash = cfg.hash(ov)?;
    let params: ExitTailParams = serde_json::from_value(cfg.resolved(ov)?["params"].take())
        .map_err(|e| Error::config("params", e.to_string()))?;
    let _lock = OutputLock::acquire(root)?;
    let batch = params.batch(&cfg.context())?;
    let dir = root.join(format!("{}-{}", cfg.experiment, &config_hash[..12]));
    fs::create_dir_all(&dir)?;
    let path = dir.join("samples.csv");
    let warnings = export_samples(&batch, &path, &config_hash)?;
    Ok((path, warnings))
}
