//! Exact planar domains: the half-plane, strips, wedges, disks, dashed
//! boundaries, disk lattices and staircase wedges, plus finite set algebra.
//!
//! Every domain is an open set. Queries are closed-form; periodic families are
//! reduced to a fundamental cell so each query costs O(1).

mod lattice;
mod piece;
mod point;
mod staircase;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use lattice::{CenterMask, LatticeBasis};
pub use piece::{FlatExtent, Piece, PieceKind, PieceNearest};
pub use point::Point;
pub use staircase::{Stage, StaircaseWedge, Terminal};

use crate::error::{Error, Result};

/// Identifies the boundary component a path exits through.
///
/// The derived ordering is the tie-break order: among equidistant features the
/// smallest one is reported.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFeature {
    /// The real axis bounding the half-plane.
    Line,
    StripEdge { right: bool },
    Ray { upper: bool },
    Circle,
    /// Segment `n` of a dashed line, centered at `n·period`.
    Segment { index: i64 },
    /// Solid piece `index` (counted from the apex) of a dashed wedge ray.
    RaySegment { upper: bool, index: u64 },
    /// Removed disk at lattice indices `(i, j)`.
    Hole { i: i64, j: i64 },
    StaircaseRay { stage: usize, upper: bool },
    StaircaseArc { stage: usize, upper: bool },
    /// Feature of component `part` of a union or intersection.
    Part { part: usize, inner: Box<BoundaryFeature> },
}

fn side(upper: bool) -> &'static str {
    if upper {
        "upper"
    } else {
        "lower"
    }
}

impl fmt::Display for BoundaryFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryFeature::Line => write!(f, "line"),
            BoundaryFeature::StripEdge { right } => {
                write!(f, "strip_edge:{}", if *right { "right" } else { "left" })
            }
            BoundaryFeature::Ray { upper } => write!(f, "ray:{}", side(*upper)),
            BoundaryFeature::Circle => write!(f, "circle"),
            BoundaryFeature::Segment { index } => write!(f, "segment:{index}"),
            BoundaryFeature::RaySegment { upper, index } => {
                write!(f, "ray_segment:{}:{index}", side(*upper))
            }
            BoundaryFeature::Hole { i, j } => write!(f, "hole:{i}:{j}"),
            BoundaryFeature::StaircaseRay { stage, upper } => {
                write!(f, "staircase_ray:{stage}:{}", side(*upper))
            }
            BoundaryFeature::StaircaseArc { stage, upper } => {
                write!(f, "staircase_arc:{stage}:{}", side(*upper))
            }
            BoundaryFeature::Part { part, inner } => write!(f, "part:{part}/{inner}"),
        }
    }
}

impl FromStr for BoundaryFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized boundary feature '{s}'"));
        if let Some(rest) = s.strip_prefix("part:") {
            let (part, inner) = rest.split_once('/').ok_or_else(bad)?;
            return Ok(BoundaryFeature::Part {
                part: part.parse().map_err(|_| bad())?,
                inner: Box::new(inner.parse()?),
            });
        }
        let fields: Vec<&str> = s.split(':').collect();
        let upper = |t: &str| match t {
            "upper" => Ok(true),
            "lower" => Ok(false),
            _ => Err(bad()),
        };
        let int = |t: &str| t.parse::<i64>().map_err(|_| bad());
        Ok(match fields.as_slice() {
            ["line"] => BoundaryFeature::Line,
            ["circle"] => BoundaryFeature::Circle,
            ["strip_edge", "right"] => BoundaryFeature::StripEdge { right: true },
            ["strip_edge", "left"] => BoundaryFeature::StripEdge { right: false },
            ["ray", u] => BoundaryFeature::Ray { upper: upper(u)? },
            ["segment", n] => BoundaryFeature::Segment { index: int(n)? },
            ["ray_segment", u, n] => BoundaryFeature::RaySegment {
                upper: upper(u)?,
                index: n.parse().map_err(|_| bad())?,
            },
            ["hole", i, j] => BoundaryFeature::Hole {
                i: int(i)?,
                j: int(j)?,
            },
            ["staircase_ray", k, u] => BoundaryFeature::StaircaseRay {
                stage: k.parse().map_err(|_| bad())?,
                upper: upper(u)?,
            },
            ["staircase_arc", k, u] => BoundaryFeature::StaircaseArc {
                stage: k.parse().map_err(|_| bad())?,
                upper: upper(u)?,
            },
            _ => return Err(bad()),
        })
    }
}

/// Nearest boundary point of a domain, with the local shape needed by the
/// bridge crossing test.
#[derive(Debug, Clone, PartialEq)]
pub struct Nearest {
    pub dist: f64,
    pub point: Point,
    pub kind: PieceKind,
    pub normal: Point,
    pub extent: Option<FlatExtent>,
    pub feature: BoundaryFeature,
}

impl Nearest {
    fn from_piece(n: PieceNearest, feature: BoundaryFeature) -> Self {
        Nearest {
            dist: n.dist,
            point: n.point,
            kind: n.kind,
            normal: n.normal,
            extent: n.extent,
            feature,
        }
    }

    fn better_than(&self, other: &Nearest) -> bool {
        self.dist < other.dist || (self.dist == other.dist && self.feature < other.feature)
    }
}

fn keep_best(best: &mut Option<Nearest>, cand: Nearest) {
    match best {
        Some(b) if !cand.better_than(b) => {}
        _ => *best = Some(cand),
    }
}

/// First boundary contact along a chord.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordHit {
    /// Chord parameter in `[0, 1]`.
    pub s: f64,
    pub feature: BoundaryFeature,
}

fn keep_first(best: &mut Option<ChordHit>, s: Option<f64>, feature: impl FnOnce() -> BoundaryFeature) {
    if let Some(s) = s {
        if best.as_ref().is_none_or(|b| s < b.s) {
            *best = Some(ChordHit {
                s,
                feature: feature(),
            });
        }
    }
}

/// An open planar domain from the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// `{y > 0}`.
    HalfPlane,
    /// `{|x| < half_width}`.
    Strip { half_width: f64 },
    /// `{|Arg z| < half_angle}`, `half_angle ∈ (0, π]`.
    Wedge { half_angle: f64 },
    Disk { center: Point, radius: f64 },
    /// `{|z| > radius}`.
    DiskComplement { radius: f64 },
    /// The plane minus the real-axis segments `{|z - n·period| ≤ half_length}`.
    DashedHalfPlane { period: f64, half_length: f64 },
    /// The plane minus the two rays `Arg z = ±half_angle`, except for gaps
    /// `[k·period, k·period + gap]` (`k ≥ 1`) along each ray.
    DashedWedge {
        half_angle: f64,
        #[serde(default = "default_period")]
        period: f64,
        #[serde(default = "default_gap")]
        gap: f64,
    },
    /// The plane minus closed disks of radius `hole_radius` at every lattice point.
    DiskLattice {
        generators: LatticeBasis,
        hole_radius: f64,
    },
    /// The plane minus closed disks at the points of `Z²` admitted by `mask`.
    GraphComplement {
        hole_radius: f64,
        mask: CenterMask,
    },
    StaircaseWedge(StaircaseWedge),
    Union { parts: Vec<Domain> },
    Intersection { parts: Vec<Domain> },
}

fn default_period() -> f64 {
    1.0
}

fn default_gap() -> f64 {
    0.5
}

impl Domain {
    pub fn dashed_half_plane(period: f64, half_length: f64) -> Result<Self> {
        let d = Domain::DashedHalfPlane {
            period,
            half_length,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn wedge(half_angle: f64) -> Result<Self> {
        let d = Domain::Wedge { half_angle };
        d.validate()?;
        Ok(d)
    }

    pub fn square_lattice(hole_radius: f64) -> Result<Self> {
        let d = Domain::DiskLattice {
            generators: LatticeBasis::unit_square(),
            hole_radius,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks every variant invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDomain(m));
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDomain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            Domain::HalfPlane => Ok(()),
            Domain::Strip { half_width } => positive("half_width", *half_width),
            Domain::Wedge { half_angle } => {
                if *half_angle > 0.0 && *half_angle <= PI {
                    Ok(())
                } else {
                    bad(format!("wedge half_angle {half_angle} outside (0, π]"))
                }
            }
            Domain::Disk { center, radius } => {
                if !center.is_finite() {
                    return bad("disk center must be finite".into());
                }
                positive("radius", *radius)
            }
            Domain::DiskComplement { radius } => positive("radius", *radius),
            Domain::DashedHalfPlane {
                period,
                half_length,
            } => {
                positive("period", *period)?;
                positive("half_length", *half_length)?;
                if 2.0 * half_length >= *period {
                    return bad(format!(
                        "segments overlap: need 2·half_length < period (half_length = {half_length}, period = {period})"
                    ));
                }
                Ok(())
            }
            Domain::DashedWedge {
                half_angle,
                period,
                gap,
            } => {
                if !(*half_angle > 0.0 && *half_angle <= PI / 2.0) {
                    return bad(format!("dashed wedge half_angle {half_angle} outside (0, π/2]"));
                }
                positive("period", *period)?;
                positive("gap", *gap)?;
                if gap >= period {
                    return bad(format!("gap {gap} must be shorter than period {period}"));
                }
                Ok(())
            }
            Domain::DiskLattice {
                generators,
                hole_radius,
            } => {
                positive("hole_radius", *hole_radius)?;
                if 2.0 * hole_radius >= generators.min_spacing() {
                    return bad(format!(
                        "holes overlap: need 2·hole_radius < shortest lattice vector {}",
                        generators.min_spacing()
                    ));
                }
                Ok(())
            }
            Domain::GraphComplement { hole_radius, mask } => {
                positive("hole_radius", *hole_radius)?;
                if *hole_radius >= 0.5 {
                    return bad("holes overlap: need hole_radius < 1/2".into());
                }
                if let CenterMask::OutsideWedge { half_angle } = mask {
                    if !(*half_angle > 0.0 && *half_angle < PI / 2.0) {
                        return bad(format!("mask half_angle {half_angle} outside (0, π/2)"));
                    }
                }
                Ok(())
            }
            Domain::StaircaseWedge(s) => s.validate(),
            Domain::Union { parts } => {
                if parts.is_empty() {
                    return bad("union of no parts is empty".into());
                }
                parts.iter().try_for_each(Domain::validate)
            }
            Domain::Intersection { parts } => {
                if parts.is_empty() {
                    return bad("intersection of no parts is the whole plane, which has no exit".into());
                }
                parts.iter().try_for_each(Domain::validate)
            }
        }
    }

    /// Whether `p` lies in the open set.
    pub fn contains(&self, p: Point) -> bool {
        if !p.is_finite() {
            return false;
        }
        match self {
            Domain::HalfPlane => p.y > 0.0,
            Domain::Strip { half_width } => p.x.abs() < *half_width,
            Domain::Wedge { half_angle } => p.norm() > 0.0 && p.arg().abs() < *half_angle,
            Domain::Disk { center, radius } => p.dist(*center) < *radius,
            Domain::DiskComplement { radius } => p.norm() > *radius,
            Domain::DashedHalfPlane {
                period,
                half_length,
            } => {
                if p.y != 0.0 {
                    return true;
                }
                let n = (p.x / period).round();
                (p.x - n * period).abs() > *half_length
            }
            Domain::DashedWedge {
                half_angle,
                period,
                gap,
            } => [true, false].iter().all(|&upper| {
                let u = Point::polar(1.0, if upper { *half_angle } else { -half_angle });
                if p.cross(u) != 0.0 {
                    return true;
                }
                let s = p.dot(u);
                s < 0.0 || in_gap(s, *period, *gap)
            }),
            Domain::DiskLattice {
                generators,
                hole_radius,
            } => {
                let (_, _, c) = generators.nearest(p);
                p.dist(c) > *hole_radius
            }
            Domain::GraphComplement { hole_radius, mask } => {
                let (_, _, c) = mask.nearest(p);
                p.dist(c) > *hole_radius
            }
            Domain::StaircaseWedge(s) => s.contains(p),
            Domain::Union { parts } => parts.iter().any(|d| d.contains(p)),
            Domain::Intersection { parts } => parts.iter().all(|d| d.contains(p)),
        }
    }

    /// Nearest point of the boundary set to `p`, valid for `p` on either side.
    ///
    /// For unions the reported distance is a lower bound (the largest
    /// inscribed distance among the parts containing `p`).
    pub fn nearest(&self, p: Point) -> Nearest {
        let mut best: Option<Nearest> = None;
        match self {
            Domain::HalfPlane => {
                let piece = Piece::Line {
                    origin: Point::ORIGIN,
                    dir: Point::new(1.0, 0.0),
                };
                keep_best(&mut best, Nearest::from_piece(piece.nearest(p), BoundaryFeature::Line));
            }
            Domain::Strip { half_width } => {
                for right in [false, true] {
                    let x = if right { *half_width } else { -half_width };
                    let piece = Piece::Line {
                        origin: Point::new(x, 0.0),
                        dir: Point::new(0.0, 1.0),
                    };
                    keep_best(
                        &mut best,
                        Nearest::from_piece(piece.nearest(p), BoundaryFeature::StripEdge { right }),
                    );
                }
            }
            Domain::Wedge { half_angle } => {
                for upper in [false, true] {
                    let piece = wedge_ray(*half_angle, upper);
                    keep_best(
                        &mut best,
                        Nearest::from_piece(piece.nearest(p), BoundaryFeature::Ray { upper }),
                    );
                }
            }
            Domain::Disk { center, radius } => {
                let piece = Piece::Circle {
                    center: *center,
                    radius: *radius,
                };
                keep_best(&mut best, Nearest::from_piece(piece.nearest(p), BoundaryFeature::Circle));
            }
            Domain::DiskComplement { radius } => {
                let piece = Piece::Circle {
                    center: Point::ORIGIN,
                    radius: *radius,
                };
                keep_best(&mut best, Nearest::from_piece(piece.nearest(p), BoundaryFeature::Circle));
            }
            Domain::DashedHalfPlane {
                period,
                half_length,
            } => {
                let n0 = (p.x / period).round() as i64;
                for n in n0 - 1..=n0 + 1 {
                    let piece = dashed_segment(n, *period, *half_length);
                    keep_best(
                        &mut best,
                        Nearest::from_piece(piece.nearest(p), BoundaryFeature::Segment { index: n }),
                    );
                }
            }
            Domain::DashedWedge {
                half_angle,
                period,
                gap,
            } => {
                for upper in [false, true] {
                    let u = Point::polar(1.0, if upper { *half_angle } else { -half_angle });
                    let s = p.dot(u);
                    // the nearest solid point along the ray lies within one gap of s
                    let lo = (s - gap).max(0.0);
                    let hi = (s + gap).max(0.0);
                    for_each_ray_piece(u, *period, *gap, lo, hi, |k, piece| {
                        keep_best(
                            &mut best,
                            Nearest::from_piece(
                                piece.nearest(p),
                                BoundaryFeature::RaySegment { upper, index: k },
                            ),
                        );
                    });
                }
            }
            Domain::DiskLattice {
                generators,
                hole_radius,
            } => {
                let (i, j, c) = generators.nearest(p);
                let piece = Piece::Circle {
                    center: c,
                    radius: *hole_radius,
                };
                keep_best(&mut best, Nearest::from_piece(piece.nearest(p), BoundaryFeature::Hole { i, j }));
            }
            Domain::GraphComplement { hole_radius, mask } => {
                let (i, j, c) = mask.nearest(p);
                let piece = Piece::Circle {
                    center: c,
                    radius: *hole_radius,
                };
                keep_best(&mut best, Nearest::from_piece(piece.nearest(p), BoundaryFeature::Hole { i, j }));
            }
            Domain::StaircaseWedge(s) => s.for_each_piece(|piece, feature| {
                keep_best(&mut best, Nearest::from_piece(piece.nearest(p), feature));
            }),
            Domain::Intersection { parts } => {
                for (k, d) in parts.iter().enumerate() {
                    let mut n = d.nearest(p);
                    n.feature = BoundaryFeature::Part {
                        part: k,
                        inner: Box::new(n.feature),
                    };
                    keep_best(&mut best, n);
                }
            }
            Domain::Union { parts } => {
                let mut safe: f64 = 0.0;
                for (k, d) in parts.iter().enumerate() {
                    let mut n = d.nearest(p);
                    if d.contains(p) {
                        safe = safe.max(n.dist);
                    }
                    let interior_elsewhere = parts
                        .iter()
                        .enumerate()
                        .any(|(m, o)| m != k && o.contains(n.point));
                    if interior_elsewhere {
                        continue;
                    }
                    n.feature = BoundaryFeature::Part {
                        part: k,
                        inner: Box::new(n.feature),
                    };
                    keep_best(&mut best, n);
                }
                if safe > 0.0 && best.as_ref().is_none_or(|b| b.dist > safe) {
                    // the true distance lies in [safe, best.dist]; report the safe bound
                    // and withhold the local shape
                    let feature = match &best {
                        Some(b) => b.feature.clone(),
                        None => BoundaryFeature::Part {
                            part: 0,
                            inner: Box::new(parts[0].nearest(p).feature),
                        },
                    };
                    best = Some(Nearest {
                        dist: safe,
                        point: best.as_ref().map_or(p, |b| b.point),
                        kind: PieceKind::Tip,
                        normal: Point::new(0.0, 1.0),
                        extent: None,
                        feature,
                    });
                }
            }
        }
        best.expect("every domain has boundary")
    }

    /// Exact Euclidean distance from an interior point to the boundary.
    pub fn dist_to_boundary(&self, p: Point) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::outside(p));
        }
        Ok(self.nearest(p).dist)
    }

    /// The boundary component nearest to `p`, which must lie within `tol` of it.
    pub fn classify_boundary_hit(&self, p: Point, tol: f64) -> Result<BoundaryFeature> {
        let n = self.nearest(p);
        if n.dist > tol {
            return Err(Error::NotNearBoundary { dist: n.dist, tol });
        }
        Ok(n.feature)
    }

    /// First boundary contact of the straight chord from `p` to `q`, if any.
    pub fn chord_hit(&self, p: Point, q: Point) -> Option<ChordHit> {
        let mut best: Option<ChordHit> = None;
        match self {
            Domain::HalfPlane
            | Domain::Strip { .. }
            | Domain::Wedge { .. }
            | Domain::Disk { .. }
            | Domain::DiskComplement { .. } => {
                // single nearest-piece families: reuse the piece list
                self.for_each_simple_piece(|piece, feature| {
                    keep_first(&mut best, piece.chord_hit(p, q), || feature);
                });
            }
            Domain::DashedHalfPlane {
                period,
                half_length,
            } => {
                if (p.y > 0.0) != (q.y > 0.0) || p.y == 0.0 || q.y == 0.0 {
                    let s = if p.y == q.y { 0.0 } else { p.y / (p.y - q.y) };
                    let x = p.x + (q.x - p.x) * s;
                    let n = (x / period).round();
                    if (x - n * period).abs() <= *half_length {
                        keep_first(&mut best, Some(s.clamp(0.0, 1.0)), || BoundaryFeature::Segment {
                            index: n as i64,
                        });
                    }
                }
            }
            Domain::DashedWedge {
                half_angle,
                period,
                gap,
            } => {
                for upper in [false, true] {
                    let u = Point::polar(1.0, if upper { *half_angle } else { -half_angle });
                    let (a, b) = (p.cross(u), q.cross(u));
                    if (a > 0.0) == (b > 0.0) && a != 0.0 && b != 0.0 {
                        continue;
                    }
                    let s = if a == b { 0.0 } else { a / (a - b) };
                    let x = p + (q - p) * s;
                    let t = x.dot(u);
                    if t >= 0.0 && !in_gap(t, *period, *gap) {
                        let k = solid_index(t, *period, *gap);
                        keep_first(&mut best, Some(s.clamp(0.0, 1.0)), || {
                            BoundaryFeature::RaySegment { upper, index: k }
                        });
                    }
                }
            }
            Domain::DiskLattice {
                generators,
                hole_radius,
            } => {
                let (lo, hi) = chord_box(p, q, *hole_radius);
                generators.for_each_in_box(lo, hi, |i, j, c| {
                    let piece = Piece::Circle {
                        center: c,
                        radius: *hole_radius,
                    };
                    keep_first(&mut best, piece.chord_hit(p, q), || BoundaryFeature::Hole { i, j });
                });
            }
            Domain::GraphComplement { hole_radius, mask } => {
                let (lo, hi) = chord_box(p, q, *hole_radius);
                for i in lo.x.floor() as i64..=hi.x.ceil() as i64 {
                    for j in lo.y.floor() as i64..=hi.y.ceil() as i64 {
                        if !mask.admits(i, j) {
                            continue;
                        }
                        let piece = Piece::Circle {
                            center: Point::new(i as f64, j as f64),
                            radius: *hole_radius,
                        };
                        keep_first(&mut best, piece.chord_hit(p, q), || BoundaryFeature::Hole { i, j });
                    }
                }
            }
            Domain::StaircaseWedge(s) => s.for_each_piece(|piece, feature| {
                keep_first(&mut best, piece.chord_hit(p, q), || feature);
            }),
            Domain::Intersection { parts } => {
                for (k, d) in parts.iter().enumerate() {
                    if let Some(h) = d.chord_hit(p, q) {
                        keep_first(&mut best, Some(h.s), || BoundaryFeature::Part {
                            part: k,
                            inner: Box::new(h.feature),
                        });
                    }
                }
            }
            Domain::Union { parts } => {
                for (k, d) in parts.iter().enumerate() {
                    if let Some(h) = d.chord_hit(p, q) {
                        let x = p + (q - p) * h.s;
                        if parts.iter().enumerate().any(|(m, o)| m != k && o.contains(x)) {
                            continue;
                        }
                        keep_first(&mut best, Some(h.s), || BoundaryFeature::Part {
                            part: k,
                            inner: Box::new(h.feature),
                        });
                    }
                }
            }
        }
        best
    }

    fn for_each_simple_piece(&self, mut f: impl FnMut(Piece, BoundaryFeature)) {
        match self {
            Domain::HalfPlane => f(
                Piece::Line {
                    origin: Point::ORIGIN,
                    dir: Point::new(1.0, 0.0),
                },
                BoundaryFeature::Line,
            ),
            Domain::Strip { half_width } => {
                for right in [false, true] {
                    let x = if right { *half_width } else { -half_width };
                    f(
                        Piece::Line {
                            origin: Point::new(x, 0.0),
                            dir: Point::new(0.0, 1.0),
                        },
                        BoundaryFeature::StripEdge { right },
                    );
                }
            }
            Domain::Wedge { half_angle } => {
                for upper in [false, true] {
                    f(wedge_ray(*half_angle, upper), BoundaryFeature::Ray { upper });
                }
            }
            Domain::Disk { center, radius } => f(
                Piece::Circle {
                    center: *center,
                    radius: *radius,
                },
                BoundaryFeature::Circle,
            ),
            Domain::DiskComplement { radius } => f(
                Piece::Circle {
                    center: Point::ORIGIN,
                    radius: *radius,
                },
                BoundaryFeature::Circle,
            ),
            _ => unreachable!("not a single-piece family"),
        }
    }

    /// Whether the domain is bounded (every catalog exit time then has all moments).
    pub fn is_bounded(&self) -> bool {
        match self {
            Domain::Disk { .. } => true,
            Domain::Intersection { parts } => parts.iter().any(Domain::is_bounded),
            Domain::Union { parts } => parts.iter().all(Domain::is_bounded),
            _ => false,
        }
    }

    /// Short variant name.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Domain::HalfPlane => "half_plane",
            Domain::Strip { .. } => "strip",
            Domain::Wedge { .. } => "wedge",
            Domain::Disk { .. } => "disk",
            Domain::DiskComplement { .. } => "disk_complement",
            Domain::DashedHalfPlane { .. } => "dashed_half_plane",
            Domain::DashedWedge { .. } => "dashed_wedge",
            Domain::DiskLattice { .. } => "disk_lattice",
            Domain::GraphComplement { .. } => "graph_complement",
            Domain::StaircaseWedge(_) => "staircase_wedge",
            Domain::Union { .. } => "union",
            Domain::Intersection { .. } => "intersection",
        }
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("domains serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn wedge_ray(half_angle: f64, upper: bool) -> Piece {
    Piece::Ray {
        origin: Point::ORIGIN,
        dir: Point::polar(1.0, if upper { half_angle } else { -half_angle }),
    }
}

fn dashed_segment(n: i64, period: f64, half_length: f64) -> Piece {
    let c = n as f64 * period;
    Piece::Segment {
        a: Point::new(c - half_length, 0.0),
        b: Point::new(c + half_length, 0.0),
    }
}

/// Gap `k ≥ 1` of a dashed ray occupies `(k·period, k·period + gap)` in arc length.
fn in_gap(s: f64, period: f64, gap: f64) -> bool {
    let k = (s / period).floor();
    k >= 1.0 && s > k * period && s < k * period + gap
}

fn solid_index(s: f64, period: f64, gap: f64) -> u64 {
    let k = (s / period).floor().max(0.0);
    if k >= 1.0 && s < k * period + gap {
        // inside a gap's closure: attribute to the solid piece ending there
        (k - 1.0) as u64
    } else {
        k as u64
    }
}

/// Solid piece `k` of a dashed ray spans `[k·period + gap·[k ≥ 1], (k + 1)·period]`.
fn for_each_ray_piece(
    u: Point,
    period: f64,
    gap: f64,
    lo: f64,
    hi: f64,
    mut f: impl FnMut(u64, Piece),
) {
    let k0 = ((lo / period).floor() as i64 - 1).max(0) as u64;
    let k1 = ((hi / period).floor() as i64 + 1).max(0) as u64;
    for k in k0..=k1 {
        let start = k as f64 * period + if k >= 1 { gap } else { 0.0 };
        let end = (k + 1) as f64 * period;
        f(
            k,
            Piece::Segment {
                a: u * start,
                b: u * end,
            },
        );
    }
}

fn chord_box(p: Point, q: Point, pad: f64) -> (Point, Point) {
    (
        Point::new(p.x.min(q.x) - pad, p.y.min(q.y) - pad),
        Point::new(p.x.max(q.x) + pad, p.y.max(q.y) + pad),
    )
}

#[cfg(test)]
mod tests;
