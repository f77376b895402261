use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;
use crate::experiments::{resolve_params, Overrides, StudyContext};
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output root; see [`super::output_root`].
    pub dir: Option<PathBuf>,
}

/// One experiment run as written in a TOML file.
///
/// ```toml
/// experiment = "dashed-half-plane"
/// seed = 7
/// [sampler]
/// step_factor = 0.3
/// [params]
/// grid = [[2.0, 0.5]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Experiment parameters; missing keys take their defaults.
    #[serde(default = "empty_table")]
    pub params: toml::Table,
    #[serde(default)]
    pub output: OutputConfig,
}

fn empty_table() -> toml::Table {
    toml::Table::new()
}

/// `line L, column C` for a byte offset.
fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    format!("line {line}, column {col}")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid {
            location: e.span().map(|s| line_col(text, s.start)),
            message: e.message().trim().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn params_json(&self) -> Result<serde_json::Value> {
        if self.params.is_empty() {
            return Ok(serde_json::Value::Null);
        }
        serde_json::to_value(&self.params).map_err(|e| Error::config("params", e.to_string()))
    }

    pub fn context(&self) -> StudyContext {
        StudyContext {
            seed: self.seed,
            sampler: self.sampler.clone(),
            estimator: self.estimator.clone(),
        }
    }

    /// Everything that determines the report, with defaults filled in; the
    /// key order is fixed, so equal configs serialize identically.
    pub fn resolved(&self, ov: &Overrides) -> Result<serde_json::Value> {
        self.sampler.validate()?;
        self.estimator.validate()?;
        Ok(serde_json::json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "sampler": self.sampler,
            "estimator": self.estimator,
            "params": resolve_params(&self.experiment, self.params_json()?, ov)?,
        }))
    }

    /// SHA-256 of the resolved config.
    pub fn hash(&self, ov: &Overrides) -> Result<String> {
        let v = self.resolved(ov)?;
        Ok(hex::encode(Sha256::digest(v.to_string().as_bytes())))
    }
}
