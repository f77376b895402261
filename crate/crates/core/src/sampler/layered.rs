use serde::{Deserialize, Serialize};

use super::bridge::{Step, Walker};
use super::{ExitSample, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Piece, Point};
use crate::rng::sample_stream;

/// A closed target set for the alternating hitting times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSet {
    /// The line `{Im z = y}`.
    HorizontalLine { y: f64 },
    /// `{z : |Arg((z - apex)·e^{-i·direction})| ≤ half_angle}`.
    WedgeClosure {
        apex: Point,
        direction: f64,
        half_angle: f64,
    },
    /// The edges of the `Z²` grid; a layer completes on reaching an edge other
    /// than the one last hit.
    GridEdges,
}

/// Identifies which part of a layer set was hit (grid edges only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Whole,
    /// `(i, j, horizontal)`: the unit edge from `(i, j)` to `(i+1, j)` or `(i, j+1)`.
    Edge(i64, i64, bool),
}

impl LayerSet {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            LayerSet::HorizontalLine { y } => y.is_finite(),
            LayerSet::WedgeClosure {
                apex,
                direction,
                half_angle,
            } => apex.is_finite() && direction.is_finite() && *half_angle > 0.0 && *half_angle < std::f64::consts::PI,
            LayerSet::GridEdges => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLayerSpec(format!("{self:?}")))
        }
    }

    fn contains(&self, p: Point) -> bool {
        match self {
            LayerSet::HorizontalLine { y } => p.y == *y,
            LayerSet::WedgeClosure {
                apex,
                direction,
                half_angle,
            } => {
                let q = p - *apex;
                q.norm() == 0.0 || wrap(q.arg() - direction).abs() <= *half_angle
            }
            LayerSet::GridEdges => p.x.fract() == 0.0 || p.y.fract() == 0.0,
        }
    }

    /// The point where the chord `from → to` meets the set at parameter `s`,
    /// placed exactly on the set so a path can restart from it.
    fn landing(&self, from: Point, to: Point, s: f64, part: Part) -> Point {
        let c = from + (to - from) * s;
        match (self, part) {
            (LayerSet::HorizontalLine { y }, _) => Point::new(c.x, *y),
            (LayerSet::GridEdges, Part::Edge(_, j, true)) => Point::new(c.x, j as f64),
            (LayerSet::GridEdges, Part::Edge(i, _, false)) => Point::new(i as f64, c.y),
            _ if self.contains(c) => c,
            _ => to,
        }
    }

    /// The part containing `p`, for sets where `p` already lies in the set.
    fn part_at(&self, p: Point) -> Part {
        match self {
            LayerSet::GridEdges => {
                if p.y.fract() == 0.0 {
                    Part::Edge(p.x.floor() as i64, p.y as i64, true)
                } else {
                    Part::Edge(p.x as i64, p.y.floor() as i64, false)
                }
            }
            _ => Part::Whole,
        }
    }

    /// First chord parameter at which `from → to` meets the set, skipping `exclude`.
    fn first_hit(&self, from: Point, to: Point, exclude: Option<Part>) -> Option<(f64, Part)> {
        match self {
            LayerSet::HorizontalLine { y } => {
                let (a, b) = (from.y - y, to.y - y);
                if a * b > 0.0 || a == b {
                    return None;
                }
                Some((a / (a - b), Part::Whole))
            }
            LayerSet::WedgeClosure {
                apex,
                direction,
                half_angle,
            } => {
                if self.contains(from) {
                    return Some((0.0, Part::Whole));
                }
                let mut best: Option<f64> = None;
                for sgn in [-1.0, 1.0] {
                    let ray = Piece::Ray {
                        origin: *apex,
                        dir: Point::polar(1.0, direction + sgn * half_angle),
                    };
                    if let Some(s) = ray.chord_hit(from, to) {
                        best = Some(best.map_or(s, |b: f64| b.min(s)));
                    }
                }
                match best {
                    Some(s) => Some((s, Part::Whole)),
                    None if self.contains(to) => Some((1.0, Part::Whole)),
                    None => None,
                }
            }
            LayerSet::GridEdges => {
                let mut best: Option<(f64, Part)> = None;
                let mut consider = |s: f64, part: Part| {
                    if Some(part) != exclude && best.is_none_or(|(b, _)| s < b) {
                        best = Some((s, part));
                    }
                };
                let d = to - from;
                for (lo, hi, horizontal) in [(from.x, to.x, false), (from.y, to.y, true)] {
                    let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
                    let mut k = a.ceil();
                    while k <= b {
                        if hi != lo {
                            let s = (k - lo) / (hi - lo);
                            let c = from + d * s;
                            let part = if horizontal {
                                Part::Edge(c.x.floor() as i64, k as i64, true)
                            } else {
                                Part::Edge(k as i64, c.y.floor() as i64, false)
                            };
                            consider(s, part);
                        }
                        k += 1.0;
                    }
                }
                best
            }
        }
    }
}

fn wrap(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Alternating hitting times of `K̃` and `K`, truncated at the exit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerTrace {
    /// `τ̃_1, τ̃_2, …`: each layer's completion time, followed (if the path exited
    /// or was truncated first) by `T(D) ∧ t_max` for the first uncompleted layer.
    pub layer_times: Vec<f64>,
    pub layers_completed: usize,
    /// The path left `D` before completing the first layer.
    pub exited_first: bool,
    /// The terminal sample: the exit, the truncation at `t_max`, or, once
    /// `max_layers` layers are done, the landing point on the last set hit.
    pub exit: ExitSample,
}

/// Runs one path from `a ∈ K`, alternately hitting `K̃` and `K`, until it leaves
/// `d`, reaches `t_max`, or completes `max_layers` layers.
#[allow(clippy::too_many_arguments)]
pub fn sample_layered(
    d: &Domain,
    k: &LayerSet,
    k_tilde: &LayerSet,
    a: Point,
    max_layers: usize,
    cfg: &SamplerConfig,
    index: u64,
) -> Result<LayerTrace> {
    d.validate()?;
    cfg.validate()?;
    k.validate()?;
    k_tilde.validate()?;
    if k == k_tilde && *k != LayerSet::GridEdges {
        return Err(Error::InvalidLayerSpec("K and K̃ must be disjoint".into()));
    }
    if !k.contains(a) {
        return Err(Error::InvalidLayerSpec(format!("start ({}, {}) is not in K", a.x, a.y)));
    }
    if max_layers == 0 {
        return Err(Error::InvalidLayerSpec("max_layers must be at least 1".into()));
    }
    let mut rng = sample_stream(cfg.seed, index);
    let mut walker = Walker::new(d, a, cfg)?;
    let mut times = Vec::new();
    let mut exclude = Some(k.part_at(a));
    let mut target_is_tilde = true;
    loop {
        match walker.step(&mut rng)? {
            Step::Done(exit) => {
                let completed = times.len();
                times.push(exit.time.expect("walker samples carry time"));
                return Ok(LayerTrace {
                    layer_times: times,
                    layers_completed: completed,
                    exited_first: completed == 0 && !exit.truncated,
                    exit,
                });
            }
            Step::Moved { from, dt } => {
                let target = if target_is_tilde { k_tilde } else { k };
                if let Some((s, part)) = target.first_hit(from, walker.x, exclude) {
                    times.push(walker.t - dt + s * dt);
                    exclude = Some(part);
                    target_is_tilde = !target_is_tilde;
                    if times.len() >= max_layers {
                        return Ok(LayerTrace {
                            layers_completed: times.len(),
                            layer_times: times,
                            exited_first: false,
                            exit: ExitSample {
                                time: Some(walker.t - dt + s * dt),
                                position: target.landing(from, walker.x, s, part),
                                feature: None,
                                truncated: false,
                                steps: walker.steps,
                            },
                        });
                    }
                }
            }
        }
    }
}
