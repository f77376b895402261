use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::piece::Piece;
use super::{BoundaryFeature, Point};
use crate::error::{Error, Result};

/// One stage `(α_n, R_n)`; the first stage's radius is ignored (it is the full wedge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub angle: f64,
    #[serde(default)]
    pub radius: f64,
}

/// What the domain does beyond the last stored stage.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Terminal {
    /// The domain is exactly `D_N`.
    #[default]
    LastStage,
    /// Approximation of the limit domain: the quarter-plane `{|Arg z| < π/4}` beyond `radius`.
    QuarterPlane { radius: f64 },
}

/// `D_n = ({|z| ≥ R_n} ∩ W_n) ∪ D_{n-1}` with `D_1 = W_1`, stored as a polar
/// profile: a point `(ρ, θ)` is inside iff `|θ| < A(ρ)` where `A` is the angle of
/// the last stage whose radius is at most `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseWedge {
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub terminal: Terminal,
}

impl StaircaseWedge {
    pub fn new(stages: Vec<Stage>, terminal: Terminal) -> Result<Self> {
        let s = StaircaseWedge { stages, terminal };
        s.validate()?;
        Ok(s)
    }

    /// The first `n` stages of `self` (stage count clamped to at least one).
    pub fn truncated(&self, n: usize) -> Self {
        StaircaseWedge {
            stages: self.stages[..n.clamp(1, self.stages.len())].to_vec(),
            terminal: Terminal::LastStage,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        if self.stages.is_empty() {
            return bad("staircase wedge needs at least one stage".into());
        }
        for (k, st) in self.stages.iter().enumerate() {
            if !(st.angle > 0.0 && st.angle < FRAC_PI_4) {
                return bad(format!("stage {} angle {} outside (0, π/4)", k + 1, st.angle));
            }
            if k > 0 {
                let prev = self.stages[k - 1];
                if st.angle <= prev.angle {
                    return bad(format!("stage angles must increase strictly (stage {})", k + 1));
                }
                let prev_r = if k == 1 { 0.0 } else { prev.radius };
                if !(st.radius.is_finite() && st.radius > prev_r) {
                    return bad(format!("stage radii must increase strictly (stage {})", k + 1));
                }
            }
        }
        if let Terminal::QuarterPlane { radius } = self.terminal {
            if !(radius.is_finite() && radius > self.last_radius()) {
                return bad("quarter-plane radius must exceed the last stage radius".into());
            }
        }
        Ok(())
    }

    fn radius_of(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.stages[k].radius
        }
    }

    fn last_radius(&self) -> f64 {
        self.radius_of(self.stages.len() - 1)
    }

    /// Opening half-angle of the profile at modulus `rho`.
    pub fn profile(&self, rho: f64) -> f64 {
        if let Terminal::QuarterPlane { radius } = self.terminal {
            if rho >= radius {
                return FRAC_PI_4;
            }
        }
        let mut a = self.stages[0].angle;
        for (k, st) in self.stages.iter().enumerate().skip(1) {
            if rho >= self.radius_of(k) {
                a = st.angle;
            } else {
                break;
            }
        }
        a
    }

    pub fn contains(&self, p: Point) -> bool {
        let rho = p.norm();
        rho > 0.0 && p.arg().abs() < self.profile(rho)
    }

    /// Widest opening angle (the outermost wedge containing the domain).
    pub fn outer_angle(&self) -> f64 {
        match self.terminal {
            Terminal::LastStage => self.stages[self.stages.len() - 1].angle,
            Terminal::QuarterPlane { .. } => FRAC_PI_4,
        }
    }

    /// Every boundary piece, in feature order.
    pub fn for_each_piece(&self, mut f: impl FnMut(Piece, BoundaryFeature)) {
        let n = self.stages.len();
        let outer = match self.terminal {
            Terminal::LastStage => None,
            Terminal::QuarterPlane { radius } => Some(radius),
        };
        for k in 0..n {
            let a = self.stages[k].angle;
            let r0 = self.radius_of(k);
            let r1 = if k + 1 < n {
                Some(self.radius_of(k + 1))
            } else {
                outer
            };
            for upper in [false, true] {
                let u = Point::polar(1.0, if upper { a } else { -a });
                let piece = match r1 {
                    Some(r1) => Piece::Segment {
                        a: u * r0,
                        b: u * r1,
                    },
                    None => Piece::Ray {
                        origin: u * r0,
                        dir: u,
                    },
                };
                f(piece, BoundaryFeature::StaircaseRay { stage: k + 1, upper });
            }
            if k > 0 {
                let prev = self.stages[k - 1].angle;
                arcs(r0, prev, a, k + 1, &mut f);
            }
        }
        if let Some(radius) = outer {
            arcs(radius, self.stages[n - 1].angle, FRAC_PI_4, n + 1, &mut f);
            for upper in [false, true] {
                let u = Point::polar(1.0, if upper { FRAC_PI_4 } else { -FRAC_PI_4 });
                f(
                    Piece::Ray {
                        origin: u * radius,
                        dir: u,
                    },
                    BoundaryFeature::StaircaseRay {
                        stage: n + 1,
                        upper,
                    },
                );
            }
        }
    }
}

fn arcs(
    radius: f64,
    inner: f64,
    outer: f64,
    stage: usize,
    f: &mut impl FnMut(Piece, BoundaryFeature),
) {
    f(
        Piece::Arc {
            center: Point::ORIGIN,
            radius,
            from: -outer,
            to: -inner,
        },
        BoundaryFeature::StaircaseArc {
            stage,
            upper: false,
        },
    );
    f(
        Piece::Arc {
            center: Point::ORIGIN,
            radius,
            from: inner,
            to: outer,
        },
        BoundaryFeature::StaircaseArc { stage, upper: true },
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StaircaseWedge {
        StaircaseWedge::new(
            vec![
                Stage {
                    angle: 0.4,
                    radius: 0.0,
                },
                Stage {
                    angle: 0.6,
                    radius: 3.0,
                },
                Stage {
                    angle: 0.7,
                    radius: 10.0,
                },
            ],
            Terminal::LastStage,
        )
        .unwrap()
    }

    #[test]
    fn profile_steps_at_radii() {
        let s = sample();
        assert_eq!(s.profile(1.0), 0.4);
        assert_eq!(s.profile(3.0), 0.6);
        assert_eq!(s.profile(50.0), 0.7);
        assert!(s.contains(Point::polar(5.0, 0.5)));
        assert!(!s.contains(Point::polar(2.0, 0.5)));
    }

    #[test]
    fn rejects_non_monotone_stages() {
        let bad = StaircaseWedge::new(
            vec![
                Stage {
                    angle: 0.5,
                    radius: 0.0,
                },
                Stage {
                    angle: 0.4,
                    radius: 2.0,
                },
            ],
            Terminal::LastStage,
        );
        assert!(bad.is_err());
        let too_wide = StaircaseWedge::new(
            vec![Stage {
                angle: 0.8,
                radius: 0.0,
            }],
            Terminal::LastStage,
        );
        assert!(too_wide.is_err());
    }

    #[test]
    fn piece_count() {
        let mut n = 0;
        sample().for_each_piece(|_, _| n += 1);
        // 2 rays per stage, 2 arcs per inner radius
        assert_eq!(n, 3 * 2 + 2 * 2);
    }
}
