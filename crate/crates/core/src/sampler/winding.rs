use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ExitSample, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryFeature, Point};
use crate::rng::sample_stream;

/// Distance, in the covering surface of the punctured plane, from a point at
/// modulus `r` to the ray at angular separation `gap`.
fn ray_dist(r: f64, gap: f64) -> f64 {
    if gap >= FRAC_PI_2 {
        r
    } else {
        r * gap.sin()
    }
}

/// Samples `τ_α = inf{t : arg B_t = ±α}` with the argument tracked continuously.
///
/// Each increment is kept below π/2 in angle and outside the origin exclusion
/// disk; offending steps are refined by Brownian-bridge midpoint subdivision.
pub fn sample_winding_exit(alpha: f64, a: Point, cfg: &SamplerConfig, index: u64) -> Result<ExitSample> {
    cfg.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("winding angle must be positive, got {alpha}")));
    }
    if !a.is_finite() || a.norm() <= cfg.origin_exclusion {
        return Err(Error::InvalidArgument("winding start must be a finite point away from 0".into()));
    }
    let mut theta = a.arg();
    if theta.abs() >= alpha {
        return Err(Error::outside(a));
    }
    let mut rng = sample_stream(cfg.seed, index);
    let mut z = a;
    let mut t = 0.0;
    let mut steps = 0u64;
    let mut pending: Vec<(f64, Point)> = Vec::new();
    let on_ray = |r: f64, upper: bool| Point::polar(r, if upper { alpha } else { -alpha });
    loop {
        let upper = theta >= 0.0;
        let gap = alpha - theta.abs();
        let d = ray_dist(z.norm(), gap);
        if d <= cfg.shell_eps {
            let pos = on_ray(z.norm() * gap.cos().max(0.0), upper);
            return Ok(ExitSample::exited(Some(t), pos, BoundaryFeature::Ray { upper }, steps));
        }
        if pending.is_empty() {
            if t >= cfg.t_max || cfg.r_max.is_some_and(|r| z.norm() > r) {
                return Ok(ExitSample::truncated(cfg.t_max, z, steps));
            }
            if steps >= cfg.max_steps {
                return Err(Error::StepBudgetExceeded(cfg.max_steps));
            }
            let h = cfg.step_factor * d;
            let dt = (h * h).min(cfg.dt_max).min(cfg.t_max - t);
            let g = Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            pending.push((dt, g * dt.sqrt()));
        }
        let (dt, inc) = pending.pop().expect("nonempty");
        let w = z + inc;
        let dtheta = z.cross(w).atan2(z.dot(w));
        if dtheta.abs() >= FRAC_PI_2 || w.norm() <= cfg.origin_exclusion {
            let half = dt / 2.0;
            if half < cfg.dt_min {
                return Err(Error::OriginTooClose);
            }
            let g = Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let mid = inc * 0.5 + g * (half / 2.0).sqrt();
            pending.push((half, inc - mid));
            pending.push((half, mid));
            continue;
        }
        steps += 1;
        let next = theta + dtheta;
        let d1 = ray_dist(z.norm(), gap);
        if next.abs() >= alpha {
            let up = next > 0.0;
            let d2 = ray_dist(w.norm(), next.abs() - alpha);
            let frac = d1 / (d1 + d2);
            let c = z + inc * frac;
            return Ok(ExitSample::exited(
                Some(t + dt * frac),
                on_ray(c.norm(), up),
                BoundaryFeature::Ray { upper: up },
                steps,
            ));
        }
        // bridge test against the nearer ray, flattened
        if gap < FRAC_PI_2 && (next >= 0.0) == upper {
            let d2 = ray_dist(w.norm(), alpha - next.abs());
            if rng.random::<f64>() < (-2.0 * d1 * d2 / dt).exp() {
                let frac = d1 / (d1 + d2);
                let c = z + inc * frac;
                return Ok(ExitSample::exited(
                    Some(t + dt * frac),
                    on_ray(c.norm(), upper),
                    BoundaryFeature::Ray { upper },
                    steps,
                ));
            }
        }
        z = w;
        theta = next;
        t += dt;
    }
}
