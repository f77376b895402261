//! Fixed splitting on radius levels for the mean exit time of domains whose
//! exit time has infinite variance but a mean.
//!
//! A path splits into `branches` copies, each carrying `1/branches` of its
//! weight, the first time its radius passes `r0·ratio^j`. The weighted sum of
//! `T ∧ t_max` over the copies of one root is an unbiased estimate of
//! `E[T ∧ t_max]`; roots are independent, so the usual interval applies to their
//! mean. For a wedge of exit exponent `k = π/(2α)` the root variance is finite
//! when `branches > ratio^(4−k)`, and the expected work is bounded when
//! `branches ≤ ratio^k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bridge::{Step, Walker};
use super::SamplerConfig;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::rng::sample_stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Splitting {
    /// First level; `None` uses `2|a|` (or 1 when `a` is the origin).
    pub r0: Option<f64>,
    pub ratio: f64,
    pub branches: usize,
    pub max_levels: usize,
}

impl Default for Splitting {
    fn default() -> Self {
        Splitting {
            r0: None,
            ratio: 2.0,
            branches: 4,
            max_levels: 200,
        }
    }
}

impl Splitting {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(Error::InvalidArgument(format!("level ratio must exceed 1, got {}", self.ratio)));
        }
        if self.branches < 1 {
            return Err(Error::InvalidArgument("need at least one branch".into()));
        }
        if let Some(r) = self.r0 {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("first level must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// Totals of one root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRoot {
    /// `Σ w·(T ∧ t_max)` over the copies.
    pub value: f64,
    /// `Σ w` over copies stopped at `t_max`.
    pub truncated_weight: f64,
    pub copies: u64,
}

fn split_root(d: &Domain, a: Point, cfg: &SamplerConfig, sp: &Splitting, index: u64) -> Result<SplitRoot> {
    let r0 = sp.r0.unwrap_or(if a.norm() > 0.0 { 2.0 * a.norm() } else { 1.0 });
    let level = |j: usize| r0 * sp.ratio.powi(j as i32);
    let mut out = SplitRoot {
        value: 0.0,
        truncated_weight: 0.0,
        copies: 0,
    };
    let mut stack = vec![(Walker::new(d, a, cfg)?, sample_stream(cfg.seed, index), 1.0f64, 0usize)];
    while let Some((mut w, mut rng, weight, mut next)) = stack.pop() {
        out.copies += 1;
        loop {
            match w.step(&mut rng)? {
                Step::Done(s) => {
                    let t = s.time.unwrap_or(cfg.t_max);
                    out.value += weight * t;
                    if s.truncated {
                        out.truncated_weight += weight;
                    }
                    break;
                }
                Step::Moved { .. } => {
                    if next < sp.max_levels && w.x.norm() >= level(next) {
                        while next < sp.max_levels && w.x.norm() >= level(next) {
                            next += 1;
                        }
                        let cw = weight / sp.branches as f64;
                        for _ in 0..sp.branches {
                            let child = ChaCha8Rng::seed_from_u64(rng.random());
                            stack.push((w.clone(), child, cw, next));
                        }
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Splitting estimates for roots `0..n`, in parallel; thread-count independent.
pub fn splitting_batch(d: &Domain, a: Point, cfg: &SamplerConfig, sp: &Splitting, n: usize) -> Result<Vec<SplitRoot>> {
    d.validate()?;
    cfg.validate()?;
    sp.validate()?;
    if !d.contains(a) {
        return Err(Error::outside(a));
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| split_root(d, a, cfg, sp, i))
        .collect()
}
