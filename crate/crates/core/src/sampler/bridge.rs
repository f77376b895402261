use rand::Rng;
use rand_distr::StandardNormal;

use super::{ExitSample, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryFeature, Domain, Nearest, PieceKind, Point};

/// Outcome of one walker step.
pub(crate) enum Step {
    /// The path moved from `from` to the walker's current position.
    Moved { from: Point, dt: f64 },
    Done(ExitSample),
}

/// Bridge-corrected Euler walker; shared by the exit, layered and splitting samplers.
#[derive(Clone)]
pub(crate) struct Walker<'a> {
    d: &'a Domain,
    cfg: &'a SamplerConfig,
    pub x: Point,
    pub t: f64,
    pub steps: u64,
    near: Nearest,
}

impl<'a> Walker<'a> {
    pub fn new(d: &'a Domain, a: Point, cfg: &'a SamplerConfig) -> Result<Self> {
        if !d.contains(a) {
            return Err(Error::outside(a));
        }
        Ok(Walker {
            d,
            cfg,
            x: a,
            t: 0.0,
            steps: 0,
            near: d.nearest(a),
        })
    }

    fn exit(&self, time: f64, position: Point, near: &Nearest) -> Step {
        Step::Done(ExitSample::exited(
            Some(time),
            position,
            near.feature.clone(),
            self.steps,
        ))
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Result<Step> {
        let cfg = self.cfg;
        if self.near.dist <= cfg.shell_eps {
            return Ok(self.exit(self.t, self.near.point, &self.near.clone()));
        }
        if self.t >= cfg.t_max || cfg.r_max.is_some_and(|r| self.x.norm() > r) {
            return Ok(Step::Done(ExitSample::truncated(cfg.t_max, self.x, self.steps)));
        }
        if self.steps >= cfg.max_steps {
            return Err(Error::StepBudgetExceeded(cfg.max_steps));
        }
        let h = cfg.step_factor * self.near.dist;
        let dt = (h * h).min(cfg.dt_max).min(cfg.t_max - self.t);
        let sd = dt.sqrt();
        let g = Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let from = self.x;
        let to = from + g * sd;
        self.steps += 1;

        // a chord shorter than the boundary distance cannot cross
        let short = (to - from).norm_sq() < self.near.dist * self.near.dist;
        if !short && (self.d.chord_hit(from, to).is_some() || !self.d.contains(to)) {
            let (t, pos, feature) = self.locate_crossing(from, to, dt, rng);
            return Ok(Step::Done(ExitSample::exited(Some(t), pos, feature, self.steps)));
        }

        if let Some((frac, pos)) = bridge_crossing(&self.near, from, to) {
            let p = (-2.0 * self.near.dist * frac.1 / dt).exp();
            if rng.random::<f64>() < p {
                let t = self.t + dt * frac.0;
                let near = self.near.clone();
                // curved features: move from the tangent line onto the circle
                let pos = match near.kind {
                    PieceKind::Flat => pos,
                    _ => self.d.nearest(pos).point,
                };
                return Ok(self.exit(t, pos, &near));
            }
        }

        self.x = to;
        self.t += dt;
        self.near = self.d.nearest(to);
        Ok(Step::Moved { from, dt })
    }
}

impl Walker<'_> {
    /// The step `from → to` is known to cross the boundary: bisects it with
    /// Brownian-bridge midpoints until the crossing is localized to a small
    /// fraction of `dt`, so that linear interpolation no longer biases the time.
    fn locate_crossing<R: Rng>(
        &self,
        mut from: Point,
        mut to: Point,
        mut dt: f64,
        rng: &mut R,
    ) -> (f64, Point, BoundaryFeature) {
        let mut t0 = self.t;
        let mut near = self.near.clone();
        for _ in 0..REFINE_DEPTH {
            let half = dt / 2.0;
            let g = Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let mid = (from + to) * 0.5 + g * (half / 2.0).sqrt();
            dt = half;
            if self.d.chord_hit(from, mid).is_some() || !self.d.contains(mid) {
                to = mid;
                continue;
            }
            if let Some((frac, pos)) = bridge_crossing(&near, from, mid) {
                if rng.random::<f64>() < (-2.0 * near.dist * frac.1 / half).exp() {
                    let pos = match near.kind {
                        PieceKind::Flat => pos,
                        _ => self.d.nearest(pos).point,
                    };
                    return (t0 + half * frac.0, pos, near.feature);
                }
            }
            from = mid;
            t0 += half;
            near = self.d.nearest(from);
        }
        match self.d.chord_hit(from, to) {
            Some(hit) => (t0 + hit.s * dt, from + (to - from) * hit.s, hit.feature),
            None => {
                // grazing contact the chord test rounded away
                let n = self.d.nearest(to);
                (t0 + dt, n.point, n.feature)
            }
        }
    }
}

/// Halvings used to localize a detected crossing (time error below `dt / 2^12`).
const REFINE_DEPTH: usize = 12;

/// Flattens the feature nearest to `from` to its tangent line and returns
/// `((d1/(d1+d2), d2), crossing point)` when the bridge test applies.
fn bridge_crossing(near: &Nearest, from: Point, to: Point) -> Option<((f64, f64), Point)> {
    let flat = match near.kind {
        PieceKind::Flat => true,
        PieceKind::Curved { radius } => near.dist < radius / 4.0,
        PieceKind::Tip => false,
    };
    if !flat {
        return None;
    }
    let n = near.normal;
    let d1 = near.dist;
    let d2 = (to - near.point).dot(n);
    if d2 <= 0.0 {
        return None;
    }
    let frac = d1 / (d1 + d2);
    let c = from + (to - from) * frac;
    let proj = c - n * (c - near.point).dot(n);
    if let Some(ext) = near.extent {
        if !ext.covers(proj) {
            return None;
        }
    }
    Some(((frac, d2), proj))
}

pub(crate) fn sample<R: Rng>(d: &Domain, a: Point, cfg: &SamplerConfig, rng: &mut R) -> Result<ExitSample> {
    let mut w = Walker::new(d, a, cfg)?;
    loop {
        if let Step::Done(s) = w.step(rng)? {
            return Ok(s);
        }
    }
}
