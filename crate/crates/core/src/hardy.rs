//! Integral means `M_p(r) = (1/2π)∫|f(re^{it})|^p dt` of the catalog maps on the
//! unit disk, and the Hardy number `h(f)` read off from their growth as `r → 1`.
//!
//! Means are computed in log space (the exponential map overflows long before
//! `r` reaches the end of the schedule) by adaptive Gauss–Kronrod quadrature
//! on `[0, π]`, using the symmetry `|f(z̄)| = |f(z)|` of real-coefficient maps.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::TailEstimate;
use crate::geometry::{Domain, Point};
use crate::oracles::known_bh;
use crate::stats::ols;

/// An explicit analytic map on the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `(1 − z)/(1 + z)`, onto the right half-plane.
    Moebius,
    /// `((1 − z)/(1 + z))^exponent`, onto the wedge of half-angle `exponent·π/2`.
    WedgePower { exponent: f64 },
    /// `exp((1 − z)/(1 + z))`, the universal cover of the punctured plane outside the unit disk.
    ExpMoebius,
    Identity,
}

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MapSpec::WedgePower { exponent } if !(*exponent > 0.0 && exponent.is_finite()) => Err(Error::InvalidArgument(
                format!("wedge power exponent must be positive, got {exponent}"),
            )),
            _ => Ok(()),
        }
    }

    /// `ln|f(z)|`.
    pub fn log_modulus(&self, z: Point) -> f64 {
        let moebius = || 0.5 * ((Point::new(1.0 - z.x, -z.y)).norm_sq().ln() - (Point::new(1.0 + z.x, z.y)).norm_sq().ln());
        match self {
            MapSpec::Moebius => moebius(),
            MapSpec::WedgePower { exponent } => exponent * moebius(),
            MapSpec::ExpMoebius => (1.0 - z.norm_sq()) / Point::new(1.0 + z.x, z.y).norm_sq(),
            MapSpec::Identity => z.norm().ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-8,
            max_intervals: 4000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss–Kronrod over `breaks` (sorted, at least two points).
pub fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], opts: &QuadOptions) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (val, e) = gk15(&f, w[0], w[1]);
        total += val;
        err += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            val,
            err: e,
        });
    }
    while err > opts.rel_tol * total.abs() {
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure {
                tol: opts.rel_tol,
                err: err / total.abs(),
                max_intervals: opts.max_intervals,
            });
        }
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, val: v2, err: e2 });
    }
    Ok(total)
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0 - 1e-8).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius {r} must lie in [0, 1 - 1e-8]")));
    }
    Ok(())
}

/// `ln M_p(r)`.
pub fn log_integral_mean(f: &MapSpec, p: f64, r: f64, opts: &QuadOptions) -> Result<f64> {
    f.validate()?;
    check_radius(r)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent p must be positive, got {p}")));
    }
    let g = |t: f64| p * f.log_modulus(Point::polar(r, t));
    let shift = g(PI).max(g(0.0)).max(g(FRAC_PI_2));
    // geometric grading toward t = π, where |1 + z| is smallest
    let d = 1.0 - r;
    let mut breaks = vec![0.0];
    let mut w = FRAC_PI_2;
    let mut tail = Vec::new();
    while w > d * 1e-3 {
        tail.push(PI - w);
        w /= 4.0;
    }
    breaks.extend(tail);
    breaks.push(PI);
    let integral = integrate(|t| (g(t) - shift).exp(), &breaks, opts)?;
    Ok(shift + (integral / PI).ln())
}

/// `M_p(r) = (1/2π)∫₀^{2π} |f(re^{it})|^p dt` (may be `+∞` in floating point).
pub fn integral_mean(f: &MapSpec, p: f64, r: f64) -> Result<f64> {
    Ok(log_integral_mean(f, p, r, &QuadOptions::default())?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardyConfig {
    /// First schedule depth `K`: radii `1 − 2^{−k}`, `k = 1..K`.
    pub k_coarse: usize,
    /// Refined depth used when the coarse growth exponent is within `eps0` of 0.
    pub k_fine: usize,
    /// Trailing schedule points in the growth fit.
    pub fit_points: usize,
    pub eps0: f64,
    /// Bisection stops when the bracket is narrower than this.
    pub resolution: f64,
    pub quad: QuadOptions,
}

impl Default for HardyConfig {
    fn default() -> Self {
        HardyConfig {
            k_coarse: 20,
            k_fine: 26,
            fit_points: 4,
            eps0: 0.05,
            resolution: 1.0 / 64.0,
            quad: QuadOptions::default(),
        }
    }
}

/// `r_k = 1 − 2^{−k}`, `k = 1..=k_max`.
pub fn r_schedule(k_max: usize) -> Vec<f64> {
    (1..=k_max).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeansProfile {
    pub p: f64,
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
    pub log_means: Vec<f64>,
    /// Slope of `ln M_p` against `−ln(1 − r)` over the trailing schedule points.
    pub growth_exponent: Option<f64>,
}

pub fn means_profile(f: &MapSpec, p: f64, k_max: usize, cfg: &HardyConfig) -> Result<MeansProfile> {
    let radii = r_schedule(k_max);
    let log_means = radii
        .iter()
        .map(|&r| log_integral_mean(f, p, r, &cfg.quad))
        .collect::<Result<Vec<_>>>()?;
    let m = cfg.fit_points.min(radii.len());
    let growth_exponent = (m >= 2).then(|| {
        let xs: Vec<f64> = (k_max - m + 1..=k_max).map(|k| k as f64 * LN_2).collect();
        ols(&xs, &log_means[k_max - m..]).slope
    });
    Ok(MeansProfile {
        p,
        means: log_means.iter().map(|l| l.exp()).collect(),
        radii,
        log_means,
        growth_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub p: f64,
    pub growth: Growth,
    pub slope_coarse: f64,
    pub slope_fine: Option<f64>,
}

/// Divergent when the growth exponent exceeds `eps0`; otherwise the schedule is
/// refined, and the means count as bounded only if the refined exponent stays
/// within `eps0` and has not increased.
pub fn classify(f: &MapSpec, p: f64, cfg: &HardyConfig) -> Result<Classification> {
    let fine = means_profile(f, p, cfg.k_fine, cfg)?;
    let m = cfg.fit_points;
    let xs: Vec<f64> = (cfg.k_coarse - m + 1..=cfg.k_coarse).map(|k| k as f64 * LN_2).collect();
    let s1 = ols(&xs, &fine.log_means[cfg.k_coarse - m..cfg.k_coarse]).slope;
    let growth_of = |s: f64| s > cfg.eps0 || !s.is_finite();
    if growth_of(s1) {
        return Ok(Classification {
            p,
            growth: Growth::Divergent,
            slope_coarse: s1,
            slope_fine: None,
        });
    }
    let s2 = fine.growth_exponent.expect("fit points");
    let growth = if growth_of(s2) {
        Growth::Divergent
    } else if s2 <= s1 {
        Growth::Bounded
    } else {
        Growth::Inconclusive
    };
    Ok(Classification {
        p,
        growth,
        slope_coarse: s1,
        slope_fine: Some(s2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyEstimate {
    pub h: f64,
    /// Last bounded and first divergent exponent after bisection.
    pub bracket: (f64, f64),
    pub grid: Vec<Classification>,
    pub bisection: Vec<Classification>,
}

/// Estimates `h(f)` as the boundary between bounded and divergent exponents on
/// `p_grid`, refined by bisection.
pub fn hardy_number(f: &MapSpec, p_grid: &[f64], cfg: &HardyConfig) -> Result<HardyEstimate> {
    f.validate()?;
    if p_grid.is_empty() || p_grid.windows(2).any(|w| w[1] <= w[0]) || p_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("p grid must be positive and strictly increasing".into()));
    }
    if cfg.k_coarse < cfg.fit_points || cfg.k_fine < cfg.k_coarse || cfg.fit_points < 2 {
        return Err(Error::InvalidArgument("need fit_points >= 2 and fit_points <= k_coarse <= k_fine".into()));
    }
    let grid = p_grid
        .par_iter()
        .map(|&p| classify(f, p, cfg))
        .collect::<Result<Vec<_>>>()?;
    if let Some(c) = grid.iter().find(|c| c.growth == Growth::Inconclusive) {
        return Err(Error::Inconclusive(format!(
            "growth exponent at p = {} stays within {} of 0 under refinement",
            c.p, cfg.eps0
        )));
    }
    let first_div = grid.iter().position(|c| c.growth == Growth::Divergent);
    let Some(i) = first_div else {
        return Err(Error::Inconclusive(format!(
            "means bounded for every p up to {}; the grid does not reach the critical exponent",
            p_grid[p_grid.len() - 1]
        )));
    };
    if grid[i..].iter().any(|c| c.growth == Growth::Bounded) {
        return Err(Error::Inconclusive("bounded and divergent exponents interleave on the grid".into()));
    }
    if i == 0 {
        return Ok(HardyEstimate {
            h: 0.0,
            bracket: (0.0, p_grid[0]),
            grid,
            bisection: Vec::new(),
        });
    }
    let (mut lo, mut hi) = (p_grid[i - 1], p_grid[i]);
    let mut bisection = Vec::new();
    while hi - lo > cfg.resolution {
        let mid = 0.5 * (lo + hi);
        let c = classify(f, mid, cfg)?;
        bisection.push(c);
        match c.growth {
            Growth::Bounded => lo = mid,
            Growth::Divergent => hi = mid,
            Growth::Inconclusive => break,
        }
    }
    Ok(HardyEstimate {
        h: 0.5 * (lo + hi),
        bracket: (lo, hi),
        grid,
        bisection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurkholderReport {
    pub domain: Domain,
    pub map: MapSpec,
    pub known_bh: f64,
    pub hardy: HardyEstimate,
    pub tolerance: f64,
    /// `|h(f) − 2·bh(D)| ≤ tolerance`.
    pub analytic_ok: bool,
    pub mc_exponent: Option<f64>,
    /// `h(f)/2` within the Monte Carlo interval widened by `tolerance/2`.
    pub mc_ok: Option<bool>,
    pub passed: bool,
}

/// Checks `h(f) = 2·bh(D)` for a catalog pair `(D, f)`, optionally against a
/// Monte Carlo tail estimate for `T(D)`.
pub fn check_burkholder_equivalence(
    d: &Domain,
    f: &MapSpec,
    p_grid: &[f64],
    tolerance: f64,
    cfg: &HardyConfig,
    mc: Option<&TailEstimate>,
) -> Result<BurkholderReport> {
    let paired = match (d, f) {
        (Domain::HalfPlane, MapSpec::Moebius) | (Domain::DiskComplement { .. }, MapSpec::ExpMoebius) => true,
        (Domain::Wedge { half_angle }, MapSpec::WedgePower { exponent }) => (exponent - 2.0 * half_angle / PI).abs() < 1e-12,
        _ => false,
    };
    if !paired {
        return Err(Error::InvalidArgument(format!(
            "{} with {f:?} is not a catalog covering pair",
            d.kind_name()
        )));
    }
    let bh = known_bh(d).expect("catalog pairs are tabulated").value;
    let hardy = hardy_number(f, p_grid, cfg)?;
    let analytic_ok = (hardy.h - 2.0 * bh).abs() <= tolerance;
    let mc_ok = mc.map(|t| {
        let half = hardy.h / 2.0;
        t.ci_low - tolerance / 2.0 <= half && half <= t.ci_high + tolerance / 2.0
    });
    Ok(BurkholderReport {
        domain: d.clone(),
        map: *f,
        known_bh: bh,
        passed: analytic_ok && mc_ok.unwrap_or(true),
        hardy,
        tolerance,
        analytic_ok,
        mc_exponent: mc.map(|t| t.exponent),
        mc_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_mean_is_r_to_the_p() {
        for p in [0.5, 1.0, 3.0] {
            let m = integral_mean(&MapSpec::Identity, p, 0.5).unwrap();
            assert!((m - 0.5f64.powf(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn moebius_parseval() {
        // coefficients 1, -2, 2, -2, ...: M_2(r) = 1 + 4r²/(1 − r²)
        for r in [0.3, 0.5, 0.9] {
            let m = integral_mean(&MapSpec::Moebius, 2.0, r).unwrap();
            let exact = 1.0 + 4.0 * r * r / (1.0 - r * r);
            assert!((m - exact).abs() < 1e-6 * exact, "r={r}: {m} vs {exact}");
        }
        let m = integral_mean(&MapSpec::Moebius, 2.0, 0.5).unwrap();
        assert!((m - 7.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn wedge_power_is_a_rescaled_moebius() {
        let a = integral_mean(&MapSpec::WedgePower { exponent: 0.25 }, 2.0, 0.99).unwrap();
        let b = integral_mean(&MapSpec::Moebius, 0.5, 0.99).unwrap();
        assert!((a - b).abs() < 1e-8 * b);
    }

    #[test]
    fn exp_moebius_blows_up() {
        let m = integral_mean(&MapSpec::ExpMoebius, 0.1, 1.0 - 2f64.powi(-14)).unwrap();
        assert!(m > 1e3);
        let a = integral_mean(&MapSpec::ExpMoebius, 0.1, 0.9).unwrap();
        assert!(a < m);
    }

    #[test]
    fn radius_guard() {
        assert!(integral_mean(&MapSpec::Moebius, 1.0, 1.0 - 1e-9).is_err());
        assert!(integral_mean(&MapSpec::Moebius, -1.0, 0.5).is_err());
    }

    #[test]
    fn quadrature_failure_is_reported() {
        let opts = QuadOptions {
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let e = integrate(|t: f64| t.sqrt(), &[0.0, 1.0], &opts);
        assert!(matches!(e, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn classification_near_one() {
        let cfg = HardyConfig::default();
        assert_eq!(classify(&MapSpec::Moebius, 0.75, &cfg).unwrap().growth, Growth::Bounded);
        assert_eq!(classify(&MapSpec::Moebius, 1.25, &cfg).unwrap().growth, Growth::Divergent);
    }
}
