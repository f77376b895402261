use std::f64::consts::TAU;

use rand::Rng;

use super::{ExitSample, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};

/// Walk-on-spheres to the ε-shell. Union domains report a lower bound on the
/// distance, which still gives a boundary-free circle.
pub(crate) fn sample<R: Rng>(d: &Domain, a: Point, cfg: &SamplerConfig, rng: &mut R) -> Result<ExitSample> {
    if !d.contains(a) {
        return Err(Error::outside(a));
    }
    let mut x = a;
    let mut steps = 0u64;
    loop {
        let near = d.nearest(x);
        if near.dist <= cfg.shell_eps {
            return Ok(ExitSample::exited(None, near.point, near.feature, steps));
        }
        if steps >= cfg.max_steps {
            return Err(Error::StepBudgetExceeded(cfg.max_steps));
        }
        let theta = rng.random::<f64>() * TAU;
        x = x + Point::polar(near.dist, theta);
        steps += 1;
    }
}
