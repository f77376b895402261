use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// A planar lattice `{m z + n w}` stored with a Lagrange-Gauss reduced basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Point; 2]", into = "[Point; 2]")]
pub struct LatticeBasis {
    z: Point,
    w: Point,
    // inverse of [z w] (column-major)
    inv: [f64; 4],
}

impl LatticeBasis {
    pub fn new(z: Point, w: Point) -> Result<Self> {
        if !z.is_finite() || !w.is_finite() {
            return Err(Error::InvalidDomain("lattice generators must be finite".into()));
        }
        let det = z.cross(w);
        if det.abs() < 1e-12 * z.norm_sq().max(w.norm_sq()).max(1e-300) {
            return Err(Error::InvalidDomain(
                "lattice generators are linearly dependent".into(),
            ));
        }
        let (mut a, mut b) = (z, w);
        if a.norm_sq() > b.norm_sq() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            // ties keep b, so reducing a reduced basis is a no-op
            let r = a.dot(b) / a.norm_sq();
            let mu = if r.abs() <= 0.5 { 0.0 } else { r.round() };
            b = b - a * mu;
            if b.norm_sq() >= a.norm_sq() {
                break;
            }
            std::mem::swap(&mut a, &mut b);
        }
        let det = a.cross(b);
        let inv = [b.y / det, -a.y / det, -b.x / det, a.x / det];
        Ok(LatticeBasis { z: a, w: b, inv })
    }

    pub fn unit_square() -> Self {
        LatticeBasis::new(Point::new(1.0, 0.0), Point::new(0.0, 1.0)).expect("valid basis")
    }

    pub fn generators(&self) -> (Point, Point) {
        (self.z, self.w)
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn min_spacing(&self) -> f64 {
        self.z.norm()
    }

    pub fn point(&self, i: i64, j: i64) -> Point {
        self.z * i as f64 + self.w * j as f64
    }

    /// Lattice coordinates of `p` (real, not rounded).
    pub fn coords(&self, p: Point) -> (f64, f64) {
        (
            self.inv[0] * p.x + self.inv[2] * p.y,
            self.inv[1] * p.x + self.inv[3] * p.y,
        )
    }

    /// Nearest lattice point to `p` with its indices; ties go to the smallest `(i, j)`.
    pub fn nearest(&self, p: Point) -> (i64, i64, Point) {
        let (a, b) = self.coords(p);
        // the reduced basis keeps the closest point next to the rounded one
        let (i0, j0) = (a.round() as i64, b.round() as i64);
        let mut best = (i64::MAX, i64::MAX, Point::ORIGIN, f64::INFINITY);
        for i in i0 - 1..=i0 + 1 {
            for j in j0 - 1..=j0 + 1 {
                let c = self.point(i, j);
                let d = (p - c).norm_sq();
                if d < best.3 || (d == best.3 && (i, j) < (best.0, best.1)) {
                    best = (i, j, c, d);
                }
            }
        }
        (best.0, best.1, best.2)
    }

    /// Calls `f` for every lattice point inside the axis-aligned box (possibly a few more).
    pub fn for_each_in_box(&self, lo: Point, hi: Point, mut f: impl FnMut(i64, i64, Point)) {
        let corners = [lo, Point::new(hi.x, lo.y), Point::new(lo.x, hi.y), hi];
        let (mut amin, mut amax, mut bmin, mut bmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for c in corners {
            let (a, b) = self.coords(c);
            amin = amin.min(a);
            amax = amax.max(a);
            bmin = bmin.min(b);
            bmax = bmax.max(b);
        }
        for i in amin.floor() as i64..=amax.ceil() as i64 {
            for j in bmin.floor() as i64..=bmax.ceil() as i64 {
                f(i, j, self.point(i, j));
            }
        }
    }
}

impl TryFrom<[Point; 2]> for LatticeBasis {
    type Error = Error;
    fn try_from(g: [Point; 2]) -> Result<Self> {
        LatticeBasis::new(g[0], g[1])
    }
}

impl From<LatticeBasis> for [Point; 2] {
    fn from(l: LatticeBasis) -> Self {
        [l.z, l.w]
    }
}

/// Which points of `Z²` carry a removed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mask", rename_all = "snake_case", deny_unknown_fields)]
pub enum CenterMask {
    All,
    /// Centers outside the closed wedge `{|Arg z| ≤ α}` (the origin counts as inside).
    OutsideWedge { half_angle: f64 },
    /// Centers with `x ≥ 0`; the left half-plane is hole-free.
    RightHalfPlane,
}

impl CenterMask {
    pub fn admits(&self, i: i64, j: i64) -> bool {
        match *self {
            CenterMask::All => true,
            CenterMask::OutsideWedge { half_angle } => {
                (i, j) != (0, 0) && (j as f64).atan2(i as f64).abs() > half_angle
            }
            CenterMask::RightHalfPlane => i >= 0,
        }
    }

    /// Nearest admitted center of `Z²` to `p`.
    pub fn nearest(&self, p: Point) -> (i64, i64, Point) {
        match *self {
            CenterMask::All => {
                let (i, j) = (p.x.round() as i64, p.y.round() as i64);
                // round-half-away can pick the larger index on exact ties; the
                // generic search resolves ties to the smallest index
                if (p.x - p.x.floor() - 0.5).abs() < 1e-15 || (p.y - p.y.floor() - 0.5).abs() < 1e-15
                {
                    return LatticeBasis::unit_square().nearest(p);
                }
                (i, j, Point::new(i as f64, j as f64))
            }
            CenterMask::RightHalfPlane => {
                let i0 = (p.x.floor() as i64 - 1).max(0);
                let i1 = (p.x.floor() as i64 + 2).max(2);
                let j0 = p.y.floor() as i64 - 1;
                let mut best = (0, 0, Point::ORIGIN, f64::INFINITY);
                for i in i0..=i1 {
                    for j in j0..=j0 + 3 {
                        let c = Point::new(i as f64, j as f64);
                        let d = p.dist(c);
                        if d < best.3 {
                            best = (i, j, c, d);
                        }
                    }
                }
                (best.0, best.1, best.2)
            }
            CenterMask::OutsideWedge { half_angle } => nearest_outside_wedge(p, half_angle),
        }
    }
}

/// Nearest point of `Z² \ W` for the closed wedge `W = {|Arg z| ≤ α}`, `α < π/2`.
fn nearest_outside_wedge(p: Point, alpha: f64) -> (i64, i64, Point) {
    let (s, c) = alpha.sin_cos();
    let theta = p.arg();
    let inside = p.norm() > 0.0 && theta.abs() <= alpha;
    let depth = if inside {
        // distance to the nearer boundary ray
        let r = p.norm();
        r * (alpha - theta.abs()).sin().min(1.0)
    } else {
        0.0
    };
    // an open unit disk outside W lies within distance 1 of p or of its foot on
    // ∂W, and every such disk holds a lattice point
    let rho = depth + 2.0;
    let tan = s / c;
    let mut best = (0i64, 0i64, Point::ORIGIN, f64::INFINITY);
    let mut consider = |i: i64, j: i64| {
        let q = Point::new(i as f64, j as f64);
        let d = p.dist(q);
        if d < best.3 || (d == best.3 && (i, j) < (best.0, best.1)) {
            best = (i, j, q, d);
        }
    };
    let py_round = p.y.round() as i64;
    for i in (p.x - rho).ceil() as i64..=(p.x + rho).floor() as i64 {
        let dx = i as f64 - p.x;
        let h2 = rho * rho - dx * dx;
        if h2 < 0.0 {
            continue;
        }
        if i <= 0 {
            if i == 0 && py_round == 0 {
                // two candidates straddling the apex
                consider(0, 1);
                consider(0, -1);
            } else {
                consider(i, py_round);
            }
            continue;
        }
        let edge = i as f64 * tan;
        // smallest integer strictly above the upper ray in this column
        let mut up = edge.floor() as i64 + 1;
        while (up as f64).atan2(i as f64) <= alpha {
            up += 1;
        }
        while up - 1 > 0 && ((up - 1) as f64).atan2(i as f64) > alpha {
            up -= 1;
        }
        consider(i, py_round.max(up));
        consider(i, -((-py_round).max(up)));
    }
    (best.0, best.1, best.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(mask: CenterMask, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for i in -60..=60 {
            for j in -60..=60 {
                if mask.admits(i, j) {
                    best = best.min(p.dist(Point::new(i as f64, j as f64)));
                }
            }
        }
        best
    }

    #[test]
    fn masked_nearest_matches_brute_force() {
        let masks = [
            CenterMask::All,
            CenterMask::RightHalfPlane,
            CenterMask::OutsideWedge {
                half_angle: std::f64::consts::PI / 8.0,
            },
        ];
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 40.0 - 20.0
        };
        for _ in 0..400 {
            let p = Point::new(next(), next());
            for m in masks {
                let (i, j, c) = m.nearest(p);
                assert!(m.admits(i, j), "{m:?} {p:?} -> ({i},{j})");
                assert!((p.dist(c) - brute(m, p)).abs() < 1e-12, "{m:?} {p:?}");
            }
        }
    }

    #[test]
    fn reduction_keeps_the_lattice() {
        let l = LatticeBasis::new(Point::new(1.0, 0.0), Point::new(5.0, 1.0)).unwrap();
        let (z, w) = l.generators();
        assert!((z.norm() - 1.0).abs() < 1e-12);
        assert!((w.norm() - 1.0).abs() < 1e-12);
        let (i, j, c) = l.nearest(Point::new(3.2, 6.9));
        assert_eq!(c, l.point(i, j));
        assert!((c.x - 3.0).abs() < 1e-12 && (c.y - 7.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_lattice_nearest_matches_brute_force() {
        let l = LatticeBasis::new(Point::new(1.0, 0.0), Point::new(0.37, 0.81)).unwrap();
        for k in 0..500 {
            let t = k as f64 * 0.731;
            let p = Point::new(7.0 * t.sin(), 5.0 * (1.3 * t).cos());
            let (_, _, c) = l.nearest(p);
            let mut best = f64::INFINITY;
            for i in -30..=30 {
                for j in -30..=30 {
                    best = best.min(p.dist(l.point(i, j)));
                }
            }
            assert!((p.dist(c) - best).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn dependent_generators_rejected() {
        assert!(LatticeBasis::new(Point::new(1.0, 1.0), Point::new(2.0, 2.0)).is_err());
    }
}
