//! Exit-time and exit-position samplers for planar Brownian motion.
//!
//! Every sample is a pure function of `(domain, start, config, index)`: the
//! random stream is keyed by `(seed, index)`, so batches come out identical
//! under any thread count.

mod bridge;
mod layered;
mod splitting;
mod winding;
mod wos;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFeature, Domain, Point};
use crate::rng::{aux_stream, sample_stream};

pub use layered::{sample_layered, LayerSet, LayerTrace};
pub use splitting::{splitting_batch, SplitRoot, Splitting};
pub use winding::sample_winding_exit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Gaussian steps with `dt = min(dt_max, (β·dist)²)` and a Brownian-bridge crossing test.
    #[default]
    BridgeEuler,
    /// Walk-on-spheres; exit positions only.
    WalkOnSpheres,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub dt_max: f64,
    /// β in `(0, 1]`.
    pub step_factor: f64,
    /// Absorption shell width ε.
    pub shell_eps: f64,
    pub t_max: f64,
    /// Paths leaving the disk of this radius are stopped and recorded as truncated.
    pub r_max: Option<f64>,
    pub seed: u64,
    pub scheme: Scheme,
    /// Per-sample step budget.
    pub max_steps: u64,
    /// Smallest sub-step the winding sampler may refine to.
    pub dt_min: f64,
    /// Radius around 0 the winding sampler must not enter.
    pub origin_exclusion: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            dt_max: 1.0,
            step_factor: 0.3,
            shell_eps: 1e-4,
            t_max: 1e3,
            r_max: None,
            seed: 0,
            scheme: Scheme::BridgeEuler,
            max_steps: 100_000_000,
            dt_min: 1e-30,
            origin_exclusion: 1e-12,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSamplerConfig(m.into()));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.dt_max > 0.0) {
            return bad("dt_max must be positive");
        }
        if !(self.step_factor > 0.0 && self.step_factor <= 1.0) {
            return bad("step_factor must lie in (0, 1]");
        }
        if !pos(self.shell_eps) {
            return bad("shell_eps must be positive");
        }
        if !pos(self.t_max) {
            return bad("t_max must be positive and finite");
        }
        if let Some(r) = self.r_max {
            if !pos(r) {
                return bad("r_max must be positive");
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if !pos(self.dt_min) || !(self.origin_exclusion >= 0.0) {
            return bad("dt_min must be positive and origin_exclusion nonnegative");
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }
}

/// One simulated trajectory outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
    /// `T ∧ t_max`; `None` for position-only schemes.
    pub time: Option<f64>,
    pub position: Point,
    pub feature: Option<BoundaryFeature>,
    pub truncated: bool,
    pub steps: u64,
}

impl ExitSample {
    pub(crate) fn exited(time: Option<f64>, position: Point, feature: BoundaryFeature, steps: u64) -> Self {
        ExitSample {
            time,
            position,
            feature: Some(feature),
            truncated: false,
            steps,
        }
    }

    pub(crate) fn truncated(t_max: f64, position: Point, steps: u64) -> Self {
        ExitSample {
            time: Some(t_max),
            position,
            feature: None,
            truncated: true,
            steps,
        }
    }
}

/// A seeded collection of samples with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub config: SamplerConfig,
    pub start: Point,
    /// Content hash of the domain, or a label for non-domain stopping times.
    pub source: String,
    pub samples: Vec<ExitSample>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// All times, failing for position-only batches.
    pub fn times(&self) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| s.time.ok_or(Error::TimeUnavailable))
            .collect()
    }

    pub fn truncated_count(&self) -> usize {
        self.samples.iter().filter(|s| s.truncated).count()
    }

    /// The batch as if it had been sampled with horizon `t ≤ t_max`: times at or
    /// beyond `t` become truncated at `t`. Paths that exit before `t` never take
    /// a horizon-clipped step, so this matches a fresh run up to that last step.
    /// Newly truncated samples keep their original positions.
    pub fn retruncated(&self, t: f64) -> Result<SampleBatch> {
        if !(t > 0.0 && t <= self.config.t_max) {
            return Err(Error::InvalidArgument(format!(
                "re-truncation horizon {t} must lie in (0, {}]",
                self.config.t_max
            )));
        }
        let samples = self
            .samples
            .iter()
            .map(|s| match s.time {
                Some(time) if s.truncated || time >= t => ExitSample::truncated(t, s.position, s.steps),
                _ => s.clone(),
            })
            .collect();
        Ok(SampleBatch {
            config: self.config.clone().with_t_max(t),
            start: self.start,
            source: self.source.clone(),
            samples,
        })
    }
}

/// Draws `T(D) ∧ t_max` and the exit position from `a` with the configured scheme.
pub fn sample_exit(d: &Domain, a: Point, cfg: &SamplerConfig, index: u64) -> Result<ExitSample> {
    d.validate()?;
    cfg.validate()?;
    sample_exit_unchecked(d, a, cfg, index)
}

fn sample_exit_unchecked(d: &Domain, a: Point, cfg: &SamplerConfig, index: u64) -> Result<ExitSample> {
    let mut rng = sample_stream(cfg.seed, index);
    match cfg.scheme {
        Scheme::BridgeEuler => bridge::sample(d, a, cfg, &mut rng),
        Scheme::WalkOnSpheres => wos::sample(d, a, cfg, &mut rng),
    }
}

/// Walk-on-spheres exit position (no time).
pub fn sample_exit_position_wos(d: &Domain, a: Point, cfg: &SamplerConfig, index: u64) -> Result<ExitSample> {
    d.validate()?;
    cfg.validate()?;
    wos::sample(d, a, cfg, &mut sample_stream(cfg.seed, index))
}

/// Samples `0..n` in parallel; the result is independent of the thread count.
pub fn sample_batch(d: &Domain, a: Point, cfg: &SamplerConfig, n: usize) -> Result<SampleBatch> {
    d.validate()?;
    cfg.validate()?;
    if !d.contains(a) {
        return Err(Error::outside(a));
    }
    let samples = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_exit_unchecked(d, a, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        config: cfg.clone(),
        start: a,
        source: d.content_hash(),
        samples,
    })
}

/// Winding-time batch for `τ_α` from `a`.
pub fn winding_batch(alpha: f64, a: Point, cfg: &SamplerConfig, n: usize) -> Result<SampleBatch> {
    cfg.validate()?;
    let samples = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_winding_exit(alpha, a, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        config: cfg.clone(),
        start: a,
        source: format!("winding:{alpha:?}"),
        samples,
    })
}

/// Layered traces `0..n` in parallel.
pub fn layered_batch(
    d: &Domain,
    k: &LayerSet,
    k_tilde: &LayerSet,
    a: Point,
    max_layers: usize,
    cfg: &SamplerConfig,
    n: usize,
) -> Result<Vec<LayerTrace>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| sample_layered(d, k, k_tilde, a, max_layers, cfg, i))
        .collect()
}

/// Fixed-effort splitting over layers. Stage `j` runs `n` one-layer paths from
/// starts drawn uniformly among the landing points of stage `j − 1` (stage 1
/// starts at `a`), with the roles of `K` and `K̃` alternating. Returns the
/// number of paths completing the layer at each stage, stopping after `depth`
/// stages or at the first stage with no survivors.
pub fn layered_splitting(
    d: &Domain,
    k: &LayerSet,
    k_tilde: &LayerSet,
    a: Point,
    depth: usize,
    cfg: &SamplerConfig,
    n: usize,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidSamplerConfig("need at least one path per stage".into()));
    }
    let mut starts = vec![a];
    let mut counts = Vec::with_capacity(depth);
    for j in 0..depth as u64 {
        let (from, to) = if j % 2 == 0 { (k, k_tilde) } else { (k_tilde, k) };
        let landed: Vec<Point> = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let idx = j * n as u64 + i;
                let s = starts[aux_stream(cfg.seed, SPLIT_PICK ^ idx).random_range(0..starts.len())];
                sample_layered(d, from, to, s, 1, cfg, idx).map(|t| (t.layers_completed == 1).then_some(t.exit.position))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        counts.push(landed.len());
        if landed.is_empty() {
            break;
        }
        starts = landed;
    }
    Ok(counts)
}

const SPLIT_PICK: u64 = 1 << 62;

#[cfg(test)]
mod tests;
