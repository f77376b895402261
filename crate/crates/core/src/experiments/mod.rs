//! Named studies composing the samplers, estimators, oracles and Hardy-number
//! machinery. Each study takes a typed parameter record and a [`StudyContext`]
//! and returns a [`Report`] whose content is a pure function of both.

mod calibration;
mod dashed;
mod lattice;
mod staircase;

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, MomentEstimate, SurvivalPoint, TailEstimate};
use crate::geometry::Domain;
use crate::rng::derive_seed;
use crate::sampler::SamplerConfig;

pub use calibration::{
    ExitTailParams, HalfPlaneTailParams, HardyParams, OracleCalibrationParams, WindingParams,
};
pub use dashed::{DashedHalfPlaneParams, DashedWedgeParams};
pub use lattice::{EdgeRemovalParams, LatticeParams, WedgeComplementParams};
pub use staircase::{
    angle_schedule, build_plan, choose_radius, dynkin_wedge, BudgetSchedule, CertEstimator, Certificate,
    CriticalMomentParams, GrowthRatioParams, PlanSource, SearchStep, StaircaseParams, StaircasePlan,
};

/// Version of the report layout; bumped on any incompatible change.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Seed and shared sampler/estimator settings for a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyContext {
    pub seed: u64,
    /// Scheme knobs (step factor, shell width, step budget); studies set
    /// their own seeds, horizons and step caps per sub-run.
    pub sampler: SamplerConfig,
    pub estimator: EstimatorConfig,
}

impl StudyContext {
    pub fn new(seed: u64) -> Self {
        StudyContext {
            seed,
            sampler: SamplerConfig::default(),
            estimator: EstimatorConfig::default(),
        }
    }

    /// Sampler settings for sub-run `k`.
    pub fn sampler_for(&self, k: u64, t_max: f64, dt_max: f64) -> SamplerConfig {
        let mut c = self.sampler.clone();
        c.seed = derive_seed(self.seed, k);
        c.t_max = t_max;
        c.dt_max = dt_max;
        c
    }

    /// Estimator settings with an optional lower-quantile override.
    pub fn estimator_with(&self, lower_quantile: Option<f64>) -> EstimatorConfig {
        let mut e = self.estimator.clone();
        if let Some(q) = lower_quantile {
            e.lower_quantile = q;
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Plot-ready table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Everything a study produced. Contains no timestamps or host data, so equal
/// inputs serialize to equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub config: serde_json::Value,
    /// Content hash of every domain sampled, by label.
    pub domains: BTreeMap<String, String>,
    /// Seed of every sub-run, by label.
    pub seeds: BTreeMap<String, u64>,
    pub oracles: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub curves: BTreeMap<String, Curve>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str, ctx: &StudyContext, params: &impl Serialize) -> Self {
        let config = serde_json::json!({
            "params": params,
            "sampler": ctx.sampler,
            "estimator": ctx.estimator,
        });
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.into(),
            seed: ctx.seed,
            config,
            domains: BTreeMap::new(),
            seeds: BTreeMap::new(),
            oracles: BTreeMap::new(),
            metrics: BTreeMap::new(),
            assertions: Vec::new(),
            curves: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records a metric; non-finite values go to the notes (JSON has no NaN).
    pub fn metric(&mut self, key: impl Into<String>, v: f64) {
        let key = key.into();
        if v.is_finite() {
            self.metrics.insert(key, v);
        } else {
            self.notes.push(format!("metric {key} = {v}"));
        }
    }

    pub fn oracle(&mut self, key: impl Into<String>, v: f64) {
        let key = key.into();
        if v.is_finite() {
            self.oracles.insert(key, v);
        } else {
            self.notes.push(format!("oracle {key} = {v}"));
        }
    }

    pub fn domain(&mut self, label: impl Into<String>, d: &Domain) {
        self.domains.insert(label.into(), d.content_hash());
    }

    pub fn seed(&mut self, label: impl Into<String>, cfg: &SamplerConfig) {
        self.seeds.insert(label.into(), cfg.seed);
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> bool {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
        passed
    }

    pub fn curve(&mut self, name: impl Into<String>, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.curves.insert(
            name.into(),
            Curve {
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            },
        );
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// SHA-256 of the metrics, oracles and assertions; equal across reruns with
    /// the same inputs.
    pub fn metrics_hash(&self) -> String {
        let body = serde_json::to_vec(&(&self.metrics, &self.oracles, &self.assertions)).expect("serializable");
        hex::encode(Sha256::digest(body))
    }

    pub(crate) fn tail(&mut self, prefix: &str, e: &TailEstimate) {
        self.metric(format!("{prefix}.exponent"), e.exponent);
        self.metric(format!("{prefix}.ci_low"), e.ci_low);
        self.metric(format!("{prefix}.ci_high"), e.ci_high);
        self.metric(format!("{prefix}.window_lo"), e.fit_window.0);
        self.metric(format!("{prefix}.window_hi"), e.fit_window.1);
        self.metric(format!("{prefix}.gof"), e.gof);
        self.metric(format!("{prefix}.n_window"), e.n_window as f64);
    }

    pub(crate) fn moment(&mut self, prefix: &str, m: &MomentEstimate) {
        self.metric(format!("{prefix}.value"), m.value);
        self.metric(format!("{prefix}.stderr"), m.stderr);
        self.metric(format!("{prefix}.truncation_share"), m.truncation_share);
    }

    pub(crate) fn survival(&mut self, name: &str, pts: &[SurvivalPoint]) {
        let rows = pts.iter().map(|p| vec![p.t, p.survival, p.lo, p.hi]).collect();
        self.curve(name, &["t", "survival", "lo", "hi"], rows);
    }
}

/// `|a − b| / |b|`.
pub(crate) fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `n` log-spaced points from `a` to `b`.
pub(crate) fn log_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

pub(crate) fn invalid(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::config(location, message)
}

/// A study runnable by name.
pub trait Study: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    fn validate(&self) -> Result<()>;
    /// Applies a sample-count override to every sub-run.
    fn set_samples(&mut self, n: usize);
    /// Applies a horizon override to the study's main batch.
    fn set_t_max(&mut self, t: f64);
    fn run(&self, ctx: &StudyContext) -> Result<Report>;
}

/// Command-line overrides applied on top of a parameter record.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// Name with its anchor, as listed.
    pub label: &'static str,
    pub summary: &'static str,
}

/// Every experiment, in a fixed order.
pub fn catalog() -> Vec<CatalogEntry> {
    let e = |name, label, summary| CatalogEntry { name, label, summary };
    vec![
        e(
            OracleCalibrationParams::NAME,
            "oracle-calibration",
            "mean exit times of the disk, strip and π/8 wedge against closed forms",
        ),
        e(
            HalfPlaneTailParams::NAME,
            "half-plane-tail",
            "half-plane tail index and moment stabilization at p = 0.4 and 0.6",
        ),
        e(
            DashedHalfPlaneParams::NAME,
            "dashed-half-plane (Thm 3.1)",
            "tail index, moments, layer decay and harmonic measure for the dashed real axis",
        ),
        e(
            LatticeParams::NAME,
            "disk-lattice",
            "moment stabilization and power-law rejection for the disk lattice",
        ),
        e(
            EdgeRemovalParams::NAME,
            "edge-removal",
            "disk lattice with the left half-plane cleared: tail index 1/2",
        ),
        e(
            WedgeComplementParams::NAME,
            "wedge-complement",
            "disks outside a wedge: tail index π/(4α)",
        ),
        e(
            DashedWedgeParams::NAME,
            "dashed-wedge",
            "dashed wedge boundary: crossing conditions and tail index π/(4(π−α))",
        ),
        e(
            HardyParams::NAME,
            "hardy-numbers",
            "integral-means Hardy numbers of the covering maps and the h = 2·bh check",
        ),
        e(
            StaircaseParams::NAME,
            "staircase-budget (Thm 5.1)",
            "radius search certifying the mean exit-time budget of each staircase stage",
        ),
        e(
            GrowthRatioParams::NAME,
            "growth-ratio (Prop 5.2)",
            "E[T] from 2R_n over 4R_n² along the staircase, against its lower bound",
        ),
        e(
            CriticalMomentParams::NAME,
            "critical-moment",
            "first moment and tail index of the deepest staircase stage",
        ),
        e(
            WindingParams::NAME,
            "winding-times",
            "tail index of the winding time τ_α against π/(4α)",
        ),
        e(
            ExitTailParams::NAME,
            "exit-tail",
            "tail index and moments of T(D) for any configured domain",
        ),
    ]
}

fn prepare<S: Study>(params: serde_json::Value, ov: &Overrides) -> Result<S> {
    let mut s: S = if params.is_null() {
        S::default()
    } else {
        serde_json::from_value(params).map_err(|e| invalid("params", e.to_string()))?
    };
    if let Some(n) = ov.samples {
        if n == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        s.set_samples(n);
    }
    if let Some(t) = ov.t_max {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid("tmax", "must be positive and finite"));
        }
        s.set_t_max(t);
    }
    s.validate()?;
    Ok(s)
}

fn run_study<S: Study>(params: serde_json::Value, ov: &Overrides, ctx: &StudyContext) -> Result<Report> {
    let s = prepare::<S>(params, ov)?;
    ctx.sampler.validate()?;
    ctx.estimator.validate()?;
    s.run(ctx)
}

fn resolve_study<S: Study>(params: serde_json::Value, ov: &Overrides) -> Result<serde_json::Value> {
    let s = prepare::<S>(params, ov)?;
    Ok(serde_json::to_value(s).expect("params serialize"))
}

fn default_study<S: Study>() -> Result<serde_json::Value> {
    Ok(serde_json::to_value(S::default()).expect("params serialize"))
}

fn unknown(name: &str) -> Error {
    Error::ExperimentUnknown {
        name: name.into(),
        available: catalog().iter().map(|e| e.name.to_string()).collect(),
    }
}

macro_rules! dispatch {
    ($name:expr, $f:ident($($arg:expr),*)) => {
        match $name {
            OracleCalibrationParams::NAME => $f::<OracleCalibrationParams>($($arg),*),
            HalfPlaneTailParams::NAME => $f::<HalfPlaneTailParams>($($arg),*),
            DashedHalfPlaneParams::NAME => $f::<DashedHalfPlaneParams>($($arg),*),
            LatticeParams::NAME => $f::<LatticeParams>($($arg),*),
            EdgeRemovalParams::NAME => $f::<EdgeRemovalParams>($($arg),*),
            WedgeComplementParams::NAME => $f::<WedgeComplementParams>($($arg),*),
            DashedWedgeParams::NAME => $f::<DashedWedgeParams>($($arg),*),
            HardyParams::NAME => $f::<HardyParams>($($arg),*),
            StaircaseParams::NAME => $f::<StaircaseParams>($($arg),*),
            GrowthRatioParams::NAME => $f::<GrowthRatioParams>($($arg),*),
            CriticalMomentParams::NAME => $f::<CriticalMomentParams>($($arg),*),
            WindingParams::NAME => $f::<WindingParams>($($arg),*),
            ExitTailParams::NAME => $f::<ExitTailParams>($($arg),*),
            other => Err(unknown(other)),
        }
    };
}

/// Parses `params` for experiment `name`, applies overrides, validates and runs.
/// A `null` parameter value selects the defaults.
pub fn run_experiment(name: &str, params: serde_json::Value, ov: &Overrides, ctx: &StudyContext) -> Result<Report> {
    dispatch!(name, run_study(params, ov, ctx))
}

/// The complete parameter record `run_experiment` would use, with defaults
/// filled in and overrides applied; validated.
pub fn resolve_params(name: &str, params: serde_json::Value, ov: &Overrides) -> Result<serde_json::Value> {
    dispatch!(name, resolve_study(params, ov))
}

/// Default parameters of experiment `name`, as JSON.
pub fn default_params(name: &str) -> Result<serde_json::Value> {
    dispatch!(name, default_study())
}

#[cfg(test)]
mod tests;
