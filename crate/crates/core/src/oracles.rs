//! Closed-form ground truths: expected exit times, survival of the half-plane
//! exit time, the harmonic measure of the dashed real axis, and the table of
//! known Brownian-Hardy numbers.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::geometry::{CenterMask, Domain, Point, Terminal};

/// `E_p[T(W_α)] = (x²tan²α − y²)/(1 − tan²α)` for `α < π/4`.
pub fn wedge_mean(alpha: f64, p: Point) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("wedge half-angle must be positive, got {alpha}")));
    }
    if alpha >= FRAC_PI_4 {
        return Err(Error::MeanInfinite(format!("wedge half-angle {alpha} is not below π/4")));
    }
    let t2 = alpha.tan().powi(2);
    let v = p.x * p.x * t2 - p.y * p.y;
    // the closed wedge, so boundary points give 0
    if p.x < 0.0 || v < -1e-12 * (p.x * p.x * t2).max(f64::MIN_POSITIVE) {
        return Err(Error::outside(p));
    }
    Ok(v.max(0.0) / (1.0 - t2))
}

/// `E_p[T] = L² − x²` for the strip `{|x| < L}`.
pub fn strip_mean(half_width: f64, p: Point) -> Result<f64> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidArgument(format!("strip half-width must be positive, got {half_width}")));
    }
    if p.x.abs() > half_width {
        return Err(Error::outside(p));
    }
    Ok(half_width * half_width - p.x * p.x)
}

/// `E_p[T] = (r² − |p − c|²)/2` for the disk of radius `r` about `c`.
pub fn disk_mean(radius: f64, center: Point, p: Point) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("disk radius must be positive, got {radius}")));
    }
    let d2 = (p - center).norm_sq();
    if d2 > radius * radius {
        return Err(Error::outside(p));
    }
    Ok((radius * radius - d2) / 2.0)
}

/// `P(T(H) > t)` from height `y`: `erf(y/√(2t))`.
pub fn half_plane_survival(y: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    erf(y / (2.0 * t).sqrt())
}

/// Harmonic-measure series with its truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms: usize,
}

/// `P_a(B_{T(H)} ∈ ∪ₙ [n·x − r, n·x + r])`, i.e. the Cauchy-law mass of the
/// segments: `(1/π) Σₙ [arctan((nx + r − x₀)/y₀) − arctan((nx − r − x₀)/y₀)]`.
pub fn dashed_segments_harmonic_measure(period: f64, half_length: f64, a: Point) -> Result<f64> {
    Ok(dashed_segments_series(period, half_length, a, 1e-8)?.value)
}

/// The series summed over `|n| ≤ N`, with both tails bracketed between the
/// integrals `∫_{N+1}^∞` and `∫_N^∞` of the (decreasing) summand; `N` grows
/// until half the bracket width is below `tol`.
pub fn dashed_segments_series(period: f64, half_length: f64, a: Point, tol: f64) -> Result<SeriesValue> {
    let (x, r) = (period, half_length);
    if !(x > 0.0 && r > 0.0 && 2.0 * r < x) {
        return Err(Error::InvalidArgument(format!("need 0 < 2r < x, got x={x}, r={r}")));
    }
    if !(a.y > 0.0 && a.is_finite()) {
        return Err(Error::outside(a));
    }
    let y0 = a.y;
    // periodic in x₀: reduce to [-x/2, x/2]
    let x0 = a.x - x * (a.x / x).round();
    let term = |n: f64| ((n * x + r - x0) / y0).atan() - ((n * x - r - x0) / y0).atan();
    // ∫_m^∞ of the right-side summand with offset `s` (x₀ ↦ s·x₀ mirrors the left side)
    let tail = |m: f64, s: f64| {
        let u = m * x - r - s * x0;
        let c = 2.0 * r;
        let g = |u: f64| u * (y0 / u).atan();
        (g(u + c) - g(u) + 0.5 * y0 * (((u + c).powi(2) + y0 * y0) / (u * u + y0 * y0)).ln()) / x
    };
    let right = |n: f64| term(n);
    let left = |n: f64| ((n * x + r + x0) / y0).atan() - ((n * x - r + x0) / y0).atan();
    let mut n_max = 64usize;
    loop {
        let nf = n_max as f64;
        let width = (right(nf) + left(nf)) / PI;
        if width / 2.0 < tol || n_max > 1 << 26 {
            let mut s = term(0.0);
            for n in 1..=n_max {
                s += right(n as f64) + left(n as f64);
            }
            let hi = tail(nf, 1.0) + tail(nf, -1.0);
            let lo = tail(nf + 1.0, 1.0) + tail(nf + 1.0, -1.0);
            return Ok(SeriesValue {
                value: (s + (hi + lo) / 2.0) / PI,
                error_bound: (hi - lo) / 2.0 / PI,
                terms: 2 * n_max + 1,
            });
        }
        n_max *= 2;
    }
}

/// A tabulated Brownian-Hardy number with where it comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnownBh {
    /// `f64::INFINITY` when every moment is finite.
    pub value: f64,
    pub source: &'static str,
}

fn entry(value: f64, source: &'static str) -> Option<KnownBh> {
    Some(KnownBh { value, source })
}

/// The exact `bh(d)` when it is determined in closed form, `None` otherwise.
pub fn known_bh(d: &Domain) -> Option<KnownBh> {
    let wedge = |a: f64| PI / (4.0 * a);
    match d {
        Domain::HalfPlane => entry(0.5, "half-plane: E[T^p] < ∞ exactly when p < 1/2"),
        Domain::Wedge { half_angle } => entry(wedge(*half_angle), "wedge of half-angle α: π/(4α)"),
        Domain::DiskComplement { .. } => entry(0.0, "complement of a disk: no finite moment"),
        Domain::Disk { .. } => entry(f64::INFINITY, "bounded domain"),
        Domain::DashedHalfPlane { .. } => entry(0.5, "dashed real axis: same as the half-plane for every period and gap"),
        Domain::DiskLattice { .. } => entry(f64::INFINITY, "lattice of disjoint disks: every moment finite"),
        Domain::GraphComplement { mask, .. } => match mask {
            CenterMask::All => entry(f64::INFINITY, "lattice of disjoint disks: every moment finite"),
            CenterMask::OutsideWedge { half_angle } => {
                entry(wedge(*half_angle), "disks outside a wedge W: equals bh(W) = π/(4α)")
            }
            CenterMask::RightHalfPlane => {
                entry(0.5, "disks in the right half-plane only: at least 1/2, and at most bh of the hole-free left half-plane")
            }
        },
        Domain::DashedWedge { half_angle, .. } => entry(
            wedge(*half_angle).min(PI / (4.0 * (PI - half_angle))),
            "dashed wedge: min of bh(W₁) = π/(4α) and bh(W₂) = π/(4(π−α))",
        ),
        Domain::StaircaseWedge(s) => match s.terminal {
            Terminal::LastStage => entry(
                wedge(s.outer_angle()),
                "finite staircase: agrees with its outermost wedge outside a bounded set",
            ),
            Terminal::QuarterPlane { .. } => entry(1.0, "quarter-plane beyond a bounded set: π/(4·π/4)"),
        },
        Domain::Strip { .. } | Domain::Union { .. } | Domain::Intersection { .. } => None,
    }
}

/// Documentation rows of the table: `(domain, bh, source)`.
pub fn bh_table() -> Vec<(String, f64, &'static str)> {
    use crate::geometry::LatticeBasis;
    let rows = [
        Domain::HalfPlane,
        Domain::Wedge { half_angle: PI / 8.0 },
        Domain::Wedge { half_angle: PI / 4.0 },
        Domain::Wedge { half_angle: PI / 2.0 },
        Domain::DiskComplement { radius: 1.0 },
        Domain::Disk {
            center: Point::ORIGIN,
            radius: 1.0,
        },
        Domain::DashedHalfPlane {
            period: 2.0,
            half_length: 0.5,
        },
        Domain::DiskLattice {
            generators: LatticeBasis::unit_square(),
            hole_radius: 0.25,
        },
        Domain::GraphComplement {
            hole_radius: 0.25,
            mask: CenterMask::OutsideWedge { half_angle: PI / 8.0 },
        },
        Domain::GraphComplement {
            hole_radius: 0.25,
            mask: CenterMask::RightHalfPlane,
        },
        Domain::DashedWedge {
            half_angle: PI / 4.0,
            period: 1.0,
            gap: 0.5,
        },
    ];
    rows.iter()
        .map(|d| {
            let k = known_bh(d).expect("tabulated");
            (serde_json::to_string(d).expect("serializable"), k.value, k.source)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_mean_values() {
        let v = wedge_mean(PI / 8.0, Point::new(1.0, 0.0)).unwrap();
        assert!((v - 0.207_106_781_186_547_5).abs() < 1e-12);
        let b = Point::new(1.0, (PI / 8.0).tan());
        assert!(wedge_mean(PI / 8.0, b).unwrap().abs() < 1e-12);
        let p = Point::new(1.3, 0.2);
        let s = wedge_mean(PI / 8.0, p * 3.0).unwrap();
        assert!((s - 9.0 * wedge_mean(PI / 8.0, p).unwrap()).abs() < 1e-12);
        assert!(matches!(wedge_mean(FRAC_PI_4, Point::new(1.0, 0.0)), Err(Error::MeanInfinite(_))));
        assert!(matches!(wedge_mean(PI / 8.0, Point::new(1.0, 1.0)), Err(Error::PointOutsideDomain { .. })));
    }

    #[test]
    fn strip_and_disk_means() {
        let l = PI / 2.0;
        assert!((strip_mean(l, Point::new(0.0, 3.0)).unwrap() - 2.467_401_100_272_339_7).abs() < 1e-12);
        assert_eq!(strip_mean(l, Point::new(l, 0.0)).unwrap(), 0.0);
        assert_eq!(strip_mean(l, Point::new(0.4, 0.0)).unwrap(), strip_mean(l, Point::new(0.4, 7.0)).unwrap());
        assert_eq!(disk_mean(1.0, Point::ORIGIN, Point::ORIGIN).unwrap(), 0.5);
        assert_eq!(disk_mean(2.0, Point::ORIGIN, Point::ORIGIN).unwrap(), 2.0);
        assert_eq!(disk_mean(1.0, Point::ORIGIN, Point::new(0.0, 1.0)).unwrap(), 0.0);
        assert!(disk_mean(1.0, Point::ORIGIN, Point::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn half_plane_survival_values() {
        let v = half_plane_survival(1.0, 1.0);
        assert!((v - 0.682_689_492_137_085_9).abs() < 1e-10, "{v:.17}");
        assert!(half_plane_survival(1.0, 1e-12) > 1.0 - 1e-12);
        let t = 1e8;
        let ratio = half_plane_survival(1.0, 4.0 * t) / half_plane_survival(1.0, t);
        assert!((ratio - 0.5).abs() < 1e-6);
    }

    #[test]
    fn harmonic_measure_series() {
        let s = dashed_segments_series(2.0, 0.5, Point::new(0.0, 1.0), 1e-8).unwrap();
        assert!(s.error_bound < 1e-8);
        // brute-force partial sum with a crude tail, computed independently
        let mut brute = 0.0;
        for n in -200_000i64..=200_000 {
            let n = n as f64;
            brute += ((2.0 * n + 0.5) / 1.0f64).atan() - ((2.0 * n - 0.5) / 1.0f64).atan();
        }
        brute /= PI;
        assert!((s.value - brute).abs() < 1e-5);
        // (2/π)·arctan(coth(πy₀/x)·tan(πr/x)), the closed form of the periodic sum at x₀ = 0
        assert!((s.value - 0.527_493_729_001_074_5).abs() < 1e-8, "{}", s.value);
        let low = dashed_segments_harmonic_measure(2.0, 0.5, Point::new(0.0, 0.7)).unwrap();
        assert!((low - 0.570_314_617_311_041_4).abs() < 1e-8);
        let near_full = dashed_segments_harmonic_measure(2.0, 0.999_999, Point::new(0.0, 1.0)).unwrap();
        assert!(near_full > 0.999_99);
        let a = dashed_segments_harmonic_measure(2.0, 0.5, Point::new(0.3, 0.7)).unwrap();
        let b = dashed_segments_harmonic_measure(2.0, 0.5, Point::new(2.3, 0.7)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn table_entries() {
        assert_eq!(known_bh(&Domain::HalfPlane).unwrap().value, 0.5);
        assert!((known_bh(&Domain::Wedge { half_angle: PI / 8.0 }).unwrap().value - 2.0).abs() < 1e-12);
        assert_eq!(known_bh(&Domain::DiskComplement { radius: 1.0 }).unwrap().value, 0.0);
        let dw = Domain::DashedWedge {
            half_angle: PI / 4.0,
            period: 1.0,
            gap: 0.5,
        };
        assert!((known_bh(&dw).unwrap().value - 1.0 / 3.0).abs() < 1e-12);
        assert!(known_bh(&Domain::Strip { half_width: 1.0 }).is_none());
        assert_eq!(bh_table().len(), 11);
    }
}
