//! Boundary primitives: every catalog boundary is a finite local union of
//! lines, rays, segments, circles and circular arcs.

use std::f64::consts::PI;

use super::Point;

/// Local shape of the boundary at the nearest point, used to decide whether
/// the bridge crossing test may flatten the feature to a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceKind {
    /// Nearest point is interior to a straight piece.
    Flat,
    /// Nearest point lies on a circle of the given radius.
    Curved { radius: f64 },
    /// Nearest point is an endpoint or corner; never flattened.
    Tip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Line { origin: Point, dir: Point },
    Ray { origin: Point, dir: Point },
    Segment { a: Point, b: Point },
    Circle { center: Point, radius: f64 },
    /// Counter-clockwise arc from angle `from` to `to` (radians, `from < to`, span < 2π).
    Arc { center: Point, radius: f64, from: f64, to: f64 },
}

/// Nearest point of a piece to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceNearest {
    pub dist: f64,
    pub point: Point,
    pub kind: PieceKind,
    /// Unit normal at `point` oriented toward the query side.
    pub normal: Point,
    /// For rays and segments: the straight extent containing `point`.
    pub extent: Option<FlatExtent>,
}

/// Straight stretch `start + t dir`, `t ∈ [0, len]`, with `dir` a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatExtent {
    pub start: Point,
    pub dir: Point,
    pub len: f64,
}

impl FlatExtent {
    fn new(start: Point, dir: Point, len: f64) -> Self {
        FlatExtent {
            start,
            dir: dir.unit_or(Point::new(1.0, 0.0)),
            len,
        }
    }

    /// Whether the orthogonal projection of `x` falls on the stretch.
    pub fn covers(&self, x: Point) -> bool {
        let t = (x - self.start).dot(self.dir);
        (0.0..=self.len).contains(&t)
    }
}

fn oriented_normal(dir: Point, rel: Point) -> Point {
    let n = dir.perp().unit_or(Point::new(0.0, 1.0));
    if n.dot(rel) < 0.0 {
        -n
    } else {
        n
    }
}

fn angle_in(theta: f64, from: f64, to: f64) -> bool {
    let mut t = theta;
    while t < from {
        t += 2.0 * PI;
    }
    while t > from + 2.0 * PI {
        t -= 2.0 * PI;
    }
    t <= to
}

impl Piece {
    pub fn nearest(&self, p: Point) -> PieceNearest {
        match *self {
            Piece::Line { origin, dir } => {
                let t = (p - origin).dot(dir) / dir.norm_sq();
                let q = origin + dir * t;
                PieceNearest {
                    dist: p.dist(q),
                    point: q,
                    kind: PieceKind::Flat,
                    normal: oriented_normal(dir, p - q),
                    extent: None,
                }
            }
            Piece::Ray { origin, dir } => {
                let t = (p - origin).dot(dir) / dir.norm_sq();
                if t > 0.0 {
                    let q = origin + dir * t;
                    PieceNearest {
                        dist: p.dist(q),
                        point: q,
                        kind: PieceKind::Flat,
                        normal: oriented_normal(dir, p - q),
                        extent: Some(FlatExtent::new(origin, dir, f64::INFINITY)),
                    }
                } else {
                    tip(p, origin)
                }
            }
            Piece::Segment { a, b } => {
                let d = b - a;
                let t = (p - a).dot(d) / d.norm_sq();
                if t <= 0.0 {
                    tip(p, a)
                } else if t >= 1.0 {
                    tip(p, b)
                } else {
                    let q = a + d * t;
                    PieceNearest {
                        dist: p.dist(q),
                        point: q,
                        kind: PieceKind::Flat,
                        normal: oriented_normal(d, p - q),
                        extent: Some(FlatExtent::new(a, d, d.norm())),
                    }
                }
            }
            Piece::Circle { center, radius } => {
                let rel = p - center;
                let r = rel.norm();
                let u = rel.unit_or(Point::new(1.0, 0.0));
                let q = center + u * radius;
                let normal = if r >= radius { u } else { -u };
                PieceNearest {
                    dist: (r - radius).abs(),
                    point: q,
                    kind: PieceKind::Curved { radius },
                    normal,
                    extent: None,
                }
            }
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let rel = p - center;
                if rel.norm() > 0.0 && angle_in(rel.arg(), from, to) {
                    Piece::Circle { center, radius }.nearest(p)
                } else {
                    let a = center + Point::polar(radius, from);
                    let b = center + Point::polar(radius, to);
                    if p.dist(a) <= p.dist(b) {
                        tip(p, a)
                    } else {
                        tip(p, b)
                    }
                }
            }
        }
    }

    /// Smallest chord parameter `s ∈ [0, 1]` at which `p + s (q - p)` meets the piece.
    pub fn chord_hit(&self, p: Point, q: Point) -> Option<f64> {
        let d = q - p;
        match *self {
            Piece::Line { origin, dir } => line_param(p, d, origin, dir).map(|(s, _)| s),
            Piece::Ray { origin, dir } => match line_param(p, d, origin, dir) {
                Some((s, t)) if t >= 0.0 => Some(s),
                _ => None,
            },
            Piece::Segment { a, b } => match line_param(p, d, a, b - a) {
                Some((s, t)) if (0.0..=1.0).contains(&t) => Some(s),
                _ => None,
            },
            Piece::Circle { center, radius } => circle_roots(p, d, center, radius)
                .into_iter()
                .flatten()
                .find(|s| (0.0..=1.0).contains(s)),
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => circle_roots(p, d, center, radius)
                .into_iter()
                .flatten()
                .filter(|s| (0.0..=1.0).contains(s))
                .find(|&s| angle_in((p + d * s - center).arg(), from, to)),
        }
    }
}

fn tip(p: Point, corner: Point) -> PieceNearest {
    PieceNearest {
        dist: p.dist(corner),
        point: corner,
        kind: PieceKind::Tip,
        normal: (p - corner).unit_or(Point::new(0.0, 1.0)),
        extent: None,
    }
}

/// Intersection of `p + s d` with `origin + t dir`; returns `(s, t)` with `s ∈ [0, 1]`.
fn line_param(p: Point, d: Point, origin: Point, dir: Point) -> Option<(f64, f64)> {
    let den = d.cross(dir);
    if den == 0.0 {
        return None;
    }
    let w = origin - p;
    let s = w.cross(dir) / den;
    let t = w.cross(d) / den;
    if (0.0..=1.0).contains(&s) {
        Some((s, t))
    } else {
        None
    }
}

/// Roots of `|p + s d - c| = radius`, in increasing order.
fn circle_roots(p: Point, d: Point, c: Point, radius: f64) -> [Option<f64>; 2] {
    let a = d.norm_sq();
    if a == 0.0 {
        return [None, None];
    }
    let w = p - c;
    let b = w.dot(d);
    let cc = w.norm_sq() - radius * radius;
    let disc = b * b - a * cc;
    if disc < 0.0 {
        return [None, None];
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = if b >= 0.0 { -(b + sq) } else { -b + sq };
    let (r1, r2) = if q != 0.0 { (q / a, cc / q) } else { (0.0, 0.0) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    [Some(lo), Some(hi)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_nearest_interior_and_tip() {
        let s = Piece::Segment {
            a: Point::new(-1.0, 0.0),
            b: Point::new(1.0, 0.0),
        };
        let n = s.nearest(Point::new(0.3, 2.0));
        assert_eq!(n.kind, PieceKind::Flat);
        assert!((n.dist - 2.0).abs() < 1e-15);
        assert_eq!(n.normal, Point::new(0.0, 1.0));
        let n = s.nearest(Point::new(4.0, 4.0));
        assert_eq!(n.kind, PieceKind::Tip);
        assert!((n.dist - 5.0).abs() < 1e-12);
    }

    #[test]
    fn circle_chord_enters_from_outside() {
        let c = Piece::Circle {
            center: Point::ORIGIN,
            radius: 1.0,
        };
        let s = c.chord_hit(Point::new(-2.0, 0.0), Point::new(2.0, 0.0)).unwrap();
        assert!((s - 0.25).abs() < 1e-12);
        assert!(c.chord_hit(Point::new(-2.0, 2.0), Point::new(2.0, 2.0)).is_none());
    }

    #[test]
    fn arc_respects_angle_range() {
        let arc = Piece::Arc {
            center: Point::ORIGIN,
            radius: 2.0,
            from: 0.0,
            to: PI / 2.0,
        };
        assert!(arc
            .chord_hit(Point::new(1.0, 1.0), Point::new(3.0, 3.0))
            .is_some());
        assert!(arc
            .chord_hit(Point::new(-1.0, -1.0), Point::new(-3.0, -3.0))
            .is_none());
        let n = arc.nearest(Point::new(-3.0, 0.5));
        assert_eq!(n.kind, PieceKind::Tip);
    }

    #[test]
    fn ray_ignores_backward_crossings() {
        let r = Piece::Ray {
            origin: Point::ORIGIN,
            dir: Point::new(1.0, 0.0),
        };
        assert!(r.chord_hit(Point::new(-1.0, 1.0), Point::new(-1.0, -1.0)).is_none());
        let s = r.chord_hit(Point::new(1.0, 1.0), Point::new(1.0, -3.0)).unwrap();
        assert!((s - 0.25).abs() < 1e-15);
    }
}
