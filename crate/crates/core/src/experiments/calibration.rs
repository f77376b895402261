//! Oracle calibration, the half-plane tail, winding times, Hardy numbers and
//! the generic exit-tail study.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{invalid, log_points, rel_change, Report, Study, StudyContext};
use crate::error::Result;
use crate::estimators::{survival_curve, tail_index, truncated_moment, TailMethod};
use crate::geometry::{Domain, Point};
use crate::hardy::{check_burkholder_equivalence, integral_mean, means_profile, HardyConfig, MapSpec};
use crate::oracles::{disk_mean, half_plane_survival, known_bh, strip_mean, wedge_mean};
use crate::sampler::{sample_batch, winding_batch, SampleBatch, SamplerConfig};
use crate::stats::mean_ci;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCalibrationParams {
    pub samples: usize,
    pub disk_tolerance: f64,
    pub strip_tolerance: f64,
    pub wedge_tolerance: f64,
    /// Horizon for the disk and the strip.
    pub t_max: f64,
    /// Horizon for the π/8 wedge, whose exit time has a heavy tail.
    pub wedge_t_max: f64,
    pub wedge_dt_max: f64,
}

impl Default for OracleCalibrationParams {
    fn default() -> Self {
        OracleCalibrationParams {
            samples: 100_000,
            disk_tolerance: 0.02,
            strip_tolerance: 0.02,
            wedge_tolerance: 0.03,
            t_max: 1e3,
            wedge_t_max: 1e8,
            wedge_dt_max: 1e9,
        }
    }
}

impl Study for OracleCalibrationParams {
    const NAME: &'static str = "oracle-calibration";

    fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(invalid("params.samples", "need at least 2 samples"));
        }
        for (k, v) in [
            ("disk_tolerance", self.disk_tolerance),
            ("strip_tolerance", self.strip_tolerance),
            ("wedge_tolerance", self.wedge_tolerance),
        ] {
            if !(v > 0.0) {
                return Err(invalid(format!("params.{k}"), "must be positive"));
            }
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
    }

    fn set_t_max(&mut self, t: f64) {
        self.t_max = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let cases = [
            (
                "disk",
                Domain::Disk {
                    center: Point::ORIGIN,
                    radius: 1.0,
                },
                Point::ORIGIN,
                disk_mean(1.0, Point::ORIGIN, Point::ORIGIN)?,
                self.disk_tolerance,
                self.t_max,
                ctx.sampler.dt_max,
            ),
            (
                "strip",
                Domain::Strip { half_width: PI / 2.0 },
                Point::ORIGIN,
                strip_mean(PI / 2.0, Point::ORIGIN)?,
                self.strip_tolerance,
                self.t_max,
                ctx.sampler.dt_max,
            ),
            (
                "wedge",
                Domain::Wedge { half_angle: PI / 8.0 },
                Point::new(1.0, 0.0),
                wedge_mean(PI / 8.0, Point::new(1.0, 0.0))?,
                self.wedge_tolerance,
                self.wedge_t_max,
                self.wedge_dt_max,
            ),
        ];
        for (k, (name, d, a, exact, tol, t_max, dt_max)) in cases.into_iter().enumerate() {
            let cfg = ctx.sampler_for(k as u64, t_max, dt_max);
            let b = sample_batch(&d, a, &cfg, self.samples)?;
            let ci = mean_ci(&b.times()?, ctx.estimator.ci_level);
            let err = rel_change(ci.mean, exact);
            rep.domain(name, &d);
            rep.seed(name, &cfg);
            rep.oracle(format!("{name}.mean"), exact);
            rep.metric(format!("{name}.mean"), ci.mean);
            rep.metric(format!("{name}.stderr"), ci.stderr);
            rep.metric(format!("{name}.rel_error"), err);
            rep.metric(format!("{name}.truncated"), b.truncated_count() as f64);
            rep.check(
                format!("{name} mean within {:.0}%", tol * 100.0),
                err <= tol,
                format!("{:.6} vs exact {exact:.6} (rel. error {err:.4})", ci.mean),
            );
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HalfPlaneTailParams {
    pub samples: usize,
    pub start_height: f64,
    /// Horizon of the tail fit; moments compare this horizon with twice it.
    pub t_max: f64,
    pub dt_max: f64,
    pub lower_quantile: Option<f64>,
    pub p_stable: f64,
    pub p_divergent: f64,
    /// Largest relative change of a stable moment when the horizon doubles.
    pub stability_tolerance: f64,
    /// Largest distance between the empirical and exact survival functions.
    pub survival_tolerance: f64,
}

impl Default for HalfPlaneTailParams {
    fn default() -> Self {
        HalfPlaneTailParams {
            samples: 1_000_000,
            start_height: 1.0,
            t_max: 1e3,
            dt_max: 1e9,
            lower_quantile: Some(0.9),
            p_stable: 0.4,
            p_divergent: 0.6,
            stability_tolerance: 0.05,
            survival_tolerance: 0.01,
        }
    }
}

impl Study for HalfPlaneTailParams {
    const NAME: &'static str = "half-plane-tail";

    fn validate(&self) -> Result<()> {
        if !(self.start_height > 0.0) {
            return Err(invalid("params.start_height", "start must lie in the upper half-plane"));
        }
        if self.samples < 100 {
            return Err(invalid("params.samples", "need at least 100 samples"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
    }

    fn set_t_max(&mut self, t: f64) {
        self.t_max = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let d = Domain::HalfPlane;
        let a = Point::new(0.0, self.start_height);
        let cfg = ctx.sampler_for(0, 2.0 * self.t_max, self.dt_max);
        let est = ctx.estimator_with(self.lower_quantile);
        rep.domain("half_plane", &d);
        rep.seed("half_plane", &cfg);
        rep.oracle("bh", 0.5);
        let long = sample_batch(&d, a, &cfg, self.samples)?;
        let b = long.retruncated(self.t_max)?;
        let e = tail_index(&b, TailMethod::LogLogLS, None, &est)?;
        rep.tail("tail", &e);
        rep.check(
            "tail-index CI covers 1/2",
            e.covers(0.5),
            format!("{:.4} [{:.4}, {:.4}]", e.exponent, e.ci_low, e.ci_high),
        );

        let m1 = truncated_moment(&long, self.p_stable, Some(self.t_max), &est)?;
        let m2 = truncated_moment(&long, self.p_stable, None, &est)?;
        let change = rel_change(m2.value, m1.value);
        rep.moment("moment_stable.t", &m1);
        rep.moment("moment_stable.2t", &m2);
        rep.metric("moment_stable.rel_change", change);
        rep.check(
            format!("p = {} moment stabilizes", self.p_stable),
            change < self.stability_tolerance && !m2.divergence_flag,
            format!("relative change {change:.4} on doubling tMax"),
        );
        let md = truncated_moment(&long, self.p_divergent, None, &est)?;
        let md1 = truncated_moment(&long, self.p_divergent, Some(self.t_max), &est)?;
        rep.moment("moment_divergent.t", &md1);
        rep.moment("moment_divergent.2t", &md);
        rep.check(
            format!("p = {} flags divergence", self.p_divergent),
            md.divergence_flag,
            format!("truncation share {:.3}", md.truncation_share),
        );

        let grid = log_points(0.1, self.t_max / 2.0, 30);
        let s = survival_curve(&b, &grid, est.ci_level)?;
        let dev = s
            .iter()
            .map(|p| (p.survival - half_plane_survival(self.start_height, p.t)).abs())
            .fold(0.0, f64::max);
        rep.metric("survival.max_deviation", dev);
        rep.check(
            "survival matches erf(y/√(2t))",
            dev <= self.survival_tolerance,
            format!("sup deviation {dev:.5}"),
        );
        rep.survival("survival", &s);
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingCase {
    pub alpha: f64,
    pub t_max: f64,
    pub dt_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindingParams {
    pub samples: usize,
    pub start: Point,
    pub lower_quantile: Option<f64>,
    /// Larger angles need far longer horizons before the tail is asymptotic.
    pub cases: Vec<WindingCase>,
}

impl Default for WindingParams {
    fn default() -> Self {
        let case = |alpha: f64, t_max: f64| WindingCase {
            alpha,
            t_max,
            dt_max: t_max / 10.0,
        };
        WindingParams {
            samples: 100_000,
            start: Point::new(1.0, 0.0),
            lower_quantile: None,
            cases: vec![case(PI / 2.0, 1e6), case(PI, 1e9), case(2.0 * PI, 1e20)],
        }
    }
}

impl Study for WindingParams {
    const NAME: &'static str = "winding-times";

    fn validate(&self) -> Result<()> {
        if self.cases.is_empty() {
            return Err(invalid("params.cases", "need at least one case"));
        }
        for (k, c) in self.cases.iter().enumerate() {
            if !(c.alpha > 0.0 && c.alpha.is_finite()) {
                return Err(invalid(format!("params.cases[{k}].alpha"), "must be positive"));
            }
        }
        if self.start.norm() == 0.0 {
            return Err(invalid("params.start", "winding is undefined from the origin"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
    }

    fn set_t_max(&mut self, t: f64) {
        for c in &mut self.cases {
            c.t_max = t;
            c.dt_max = c.dt_max.min(t);
        }
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let est = ctx.estimator_with(self.lower_quantile);
        for (k, c) in self.cases.iter().enumerate() {
            let cfg = ctx.sampler_for(k as u64, c.t_max, c.dt_max);
            let label = format!("alpha_{:.4}", c.alpha);
            rep.seed(&label, &cfg);
            let target = PI / (4.0 * c.alpha);
            rep.oracle(format!("{label}.bh"), target);
            let b = winding_batch(c.alpha, self.start, &cfg, self.samples)?;
            rep.metric(format!("{label}.truncated"), b.truncated_count() as f64);
            let e = tail_index(&b, TailMethod::LogLogLS, None, &est)?;
            rep.tail(&label, &e);
            rep.check(
                format!("τ_α tail CI covers π/(4α), α = {:.4}", c.alpha),
                e.covers(target),
                format!("{:.4} [{:.4}, {:.4}] vs {target:.4}", e.exponent, e.ci_low, e.ci_high),
            );
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardyParams {
    pub p_grid: Vec<f64>,
    pub wedge_half_angle: f64,
    /// Accepted distance of `h` from its exact value; one grid step by default.
    pub tolerance: f64,
    pub parseval_tolerance: f64,
    pub config: HardyConfig,
}

impl Default for HardyParams {
    fn default() -> Self {
        HardyParams {
            // offset from the integers, where the critical exponents sit
            p_grid: (0..12).map(|k| 0.3 + 0.5 * k as f64).collect(),
            wedge_half_angle: PI / 8.0,
            tolerance: 0.5,
            parseval_tolerance: 1e-6,
            config: HardyConfig::default(),
        }
    }
}

impl Study for HardyParams {
    const NAME: &'static str = "hardy-numbers";

    fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.p_grid.windows(2).any(|w| w[1] <= w[0]) || self.p_grid[0] <= 0.0 {
            return Err(invalid("params.p_grid", "must be positive and strictly increasing"));
        }
        if !(self.wedge_half_angle > 0.0 && self.wedge_half_angle <= PI) {
            return Err(invalid("params.wedge_half_angle", "must lie in (0, π]"));
        }
        Ok(())
    }

    fn set_samples(&mut self, _: usize) {}

    fn set_t_max(&mut self, _: f64) {}

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let alpha = self.wedge_half_angle;
        let pairs = [
            ("moebius", Domain::HalfPlane, MapSpec::Moebius),
            (
                "wedge_power",
                Domain::Wedge { half_angle: alpha },
                MapSpec::WedgePower {
                    exponent: 2.0 * alpha / PI,
                },
            ),
            ("exp_moebius", Domain::DiskComplement { radius: 1.0 }, MapSpec::ExpMoebius),
        ];
        for (name, d, f) in &pairs {
            let bh = known_bh(d).expect("catalog pairs are tabulated").value;
            rep.domain(*name, d);
            rep.oracle(format!("{name}.h_exact"), 2.0 * bh);
            let r = check_burkholder_equivalence(d, f, &self.p_grid, self.tolerance, &self.config, None)?;
            rep.metric(format!("{name}.h"), r.hardy.h);
            rep.metric(format!("{name}.bracket_lo"), r.hardy.bracket.0);
            rep.metric(format!("{name}.bracket_hi"), r.hardy.bracket.1);
            rep.check(
                format!("{name}: h within {} of 2·bh", self.tolerance),
                r.analytic_ok,
                format!("h = {:.4}, 2·bh = {}", r.hardy.h, 2.0 * bh),
            );
            if *name == "exp_moebius" {
                let all = r
                    .hardy
                    .grid
                    .iter()
                    .all(|c| c.growth == crate::hardy::Growth::Divergent);
                rep.check("exp_moebius divergent for every p", all, format!("{} grid points", r.hardy.grid.len()));
            }
            let rows = r
                .hardy
                .grid
                .iter()
                .chain(&r.hardy.bisection)
                .map(|c| vec![c.p, c.slope_coarse, c.slope_fine.unwrap_or(f64::NAN)])
                .collect();
            rep.curve(format!("{name}.growth"), &["p", "slope_coarse", "slope_fine"], rows);
            let mut rows = Vec::new();
            for &p in &self.p_grid {
                match means_profile(f, p, self.config.k_coarse, &self.config) {
                    Ok(prof) => rows.extend(prof.radii.iter().zip(&prof.log_means).map(|(r, l)| vec![p, *r, *l])),
                    Err(e) => rep.note(format!("{name}: no means profile at p = {p}: {e}")),
                }
            }
            rep.curve(format!("{name}.means"), &["p", "r", "log_mean"], rows);
        }
        let m = integral_mean(&MapSpec::Moebius, 2.0, 0.5)?;
        let err = (m - 7.0 / 3.0).abs();
        rep.oracle("parseval.m2_r0.5", 7.0 / 3.0);
        rep.metric("parseval.m2_r0.5", m);
        rep.check(
            "Möbius M_2(0.5) matches Parseval 7/3",
            err <= self.parseval_tolerance,
            format!("error {err:.2e}"),
        );
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitTailParams {
    pub domain: Domain,
    pub start: Point,
    pub samples: usize,
    pub t_max: f64,
    pub dt_max: f64,
    pub lower_quantile: Option<f64>,
    pub moments: Vec<f64>,
}

impl Default for ExitTailParams {
    fn default() -> Self {
        ExitTailParams {
            domain: Domain::Wedge { half_angle: PI / 4.0 },
            start: Point::new(1.0, 0.0),
            samples: 100_000,
            t_max: 1e6,
            dt_max: 1e9,
            lower_quantile: None,
            moments: vec![0.5],
        }
    }
}

impl ExitTailParams {
    fn sampler(&self, ctx: &StudyContext) -> SamplerConfig {
        ctx.sampler_for(0, self.t_max, self.dt_max)
    }

    /// The batch the study analyses.
    pub fn batch(&self, ctx: &StudyContext) -> Result<SampleBatch> {
        sample_batch(&self.domain, self.start, &self.sampler(ctx), self.samples)
    }
}

impl Study for ExitTailParams {
    const NAME: &'static str = "exit-tail";

    fn validate(&self) -> Result<()> {
        self.domain
            .validate()
            .map_err(|e| invalid("params.domain", e.to_string()))?;
        if !self.domain.contains(self.start) {
            return Err(invalid("params.start", "start must lie in the domain"));
        }
        if self.moments.iter().any(|&p| !(p > 0.0)) {
            return Err(invalid("params.moments", "moment orders must be positive"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
    }

    fn set_t_max(&mut self, t: f64) {
        self.t_max = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let est = ctx.estimator_with(self.lower_quantile);
        rep.domain("domain", &self.domain);
        rep.seed("domain", &self.sampler(ctx));
        let b = self.batch(ctx)?;
        rep.metric("truncated", b.truncated_count() as f64);
        for &p in &self.moments {
            let m = truncated_moment(&b, p, None, &est)?;
            rep.moment(&format!("moment_{p}"), &m);
            rep.metric(format!("moment_{p}.divergence_flag"), m.divergence_flag as u8 as f64);
        }
        let known = known_bh(&self.domain);
        match tail_index(&b, TailMethod::LogLogLS, None, &est) {
            Ok(e) => {
                rep.tail("tail", &e);
                if let Some(k) = known.filter(|k| k.value.is_finite() && k.value > 0.0) {
                    rep.oracle("bh", k.value);
                    rep.note(k.source);
                    rep.check(
                        "tail-index CI covers the known bh",
                        e.covers(k.value),
                        format!("{:.4} [{:.4}, {:.4}] vs {}", e.exponent, e.ci_low, e.ci_high, k.value),
                    );
                }
            }
            Err(err) => rep.note(format!("no tail fit: {err}")),
        }
        let hi = b.config.t_max / 2.0;
        let s = survival_curve(&b, &log_points(hi * 1e-6, hi, 30), est.ci_level)?;
        rep.survival("survival", &s);
        Ok(rep)
    }
}
