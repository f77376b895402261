//! Dashed boundaries: the dashed real axis and the dashed wedge.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{invalid, log_points, rel_change, Report, Study, StudyContext};
use crate::error::Result;
use crate::estimators::{layer_decay_fit, layer_decay_split, minkowski_layer_check, survival_curve, tail_index, truncated_moment, TailMethod};
use crate::geometry::{Domain, Point};
use crate::oracles::dashed_segments_series;
use crate::sampler::{layered_batch, layered_splitting, sample_batch, sample_exit_position_wos, LayerSet, SamplerConfig, Scheme};
use crate::stats::binomial_ci;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DashedHalfPlaneParams {
    /// `(period x, half-length r)` pairs, each with `2r < x`.
    pub grid: Vec<[f64; 2]>,
    pub start: Point,
    pub samples: usize,
    pub t_max: f64,
    pub dt_max: f64,
    pub lower_quantile: Option<f64>,
    pub p_stable: f64,
    pub p_divergent: f64,
    pub stability_tolerance: f64,
    pub layer_samples: usize,
    pub max_layers: usize,
    /// Splitting stages for the layer-decay fit, each with `layer_samples` paths.
    pub split_depth: usize,
    pub layer_t_max: f64,
    pub wos_samples: usize,
    pub wos_tolerance: f64,
}

impl Default for DashedHalfPlaneParams {
    fn default() -> Self {
        DashedHalfPlaneParams {
            grid: vec![[2.0, 0.5], [2.0, 0.9], [5.0, 0.5]],
            start: Point::new(0.0, 1.0),
            samples: 100_000,
            t_max: 1e6,
            dt_max: 1e9,
            lower_quantile: None,
            p_stable: 0.4,
            p_divergent: 0.6,
            stability_tolerance: 0.05,
            layer_samples: 20_000,
            max_layers: 60,
            split_depth: 6,
            layer_t_max: 1e6,
            wos_samples: 100_000,
            wos_tolerance: 0.01,
        }
    }
}

impl Study for DashedHalfPlaneParams {
    const NAME: &'static str = "dashed-half-plane";

    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(invalid("params.grid", "need at least one (x, r) pair"));
        }
        for (k, &[x, r]) in self.grid.iter().enumerate() {
            if !(x > 0.0 && r > 0.0 && 2.0 * r < x) {
                return Err(invalid(
                    format!("params.grid[{k}]"),
                    format!("segments must not overlap: need 0 < 2r < x, got x = {x}, r = {r}"),
                ));
            }
        }
        if !(self.start.y > 0.0) {
            return Err(invalid("params.start", "start must lie above the axis (layers run between y = ±1)"));
        }
        if self.max_layers == 0 {
            return Err(invalid("params.max_layers", "must be at least 1"));
        }
        if self.split_depth < 3 {
            return Err(invalid("params.split_depth", "the decay fit needs at least 3 stages"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
        self.layer_samples = n;
        self.wos_samples = n;
    }

    fn set_t_max(&mut self, t: f64) {
        self.t_max = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let est = ctx.estimator_with(self.lower_quantile);
        rep.oracle("bh", 0.5);
        let mut all_cover = true;
        for (k, &[x, r]) in self.grid.iter().enumerate() {
            let label = format!("x{x}_r{r}");
            let d = Domain::dashed_half_plane(x, r)?;
            rep.domain(&label, &d);

            // tail and moments; the batch runs to 2·tMax so moments can be compared
            let cfg = ctx.sampler_for(4 * k as u64, 2.0 * self.t_max, self.dt_max);
            rep.seed(format!("{label}.exit"), &cfg);
            let long = sample_batch(&d, self.start, &cfg, self.samples)?;
            let b = long.retruncated(self.t_max)?;
            let e = tail_index(&b, TailMethod::LogLogLS, None, &est)?;
            rep.tail(&format!("{label}.tail"), &e);
            all_cover &= rep.check(
                format!("{label}: tail-index CI covers 1/2"),
                e.covers(0.5),
                format!("{:.4} [{:.4}, {:.4}]", e.exponent, e.ci_low, e.ci_high),
            );
            let m1 = truncated_moment(&long, self.p_stable, Some(self.t_max), &est)?;
            let m2 = truncated_moment(&long, self.p_stable, None, &est)?;
            let change = rel_change(m2.value, m1.value);
            rep.moment(&format!("{label}.moment_stable"), &m2);
            rep.metric(format!("{label}.moment_stable.rel_change"), change);
            rep.check(
                format!("{label}: p = {} moment stabilizes", self.p_stable),
                change < self.stability_tolerance && !m2.divergence_flag,
                format!("relative change {change:.4} on doubling tMax"),
            );
            let md = truncated_moment(&long, self.p_divergent, None, &est)?;
            rep.moment(&format!("{label}.moment_divergent"), &md);
            rep.check(
                format!("{label}: p = {} flags divergence", self.p_divergent),
                md.divergence_flag,
                format!("truncation share {:.3}", md.truncation_share),
            );
            let s = survival_curve(&b, &log_points(1.0, self.t_max / 2.0, 30), est.ci_level)?;
            rep.survival(&format!("{label}.survival"), &s);

            // layers between the lines y = 1 and y = -1
            let lcfg = ctx.sampler_for(4 * k as u64 + 1, self.layer_t_max, self.dt_max);
            rep.seed(format!("{label}.layers"), &lcfg);
            let kset = LayerSet::HorizontalLine { y: 1.0 };
            let ktilde = LayerSet::HorizontalLine { y: -1.0 };
            let a = Point::new(self.start.x, 1.0);
            let traces = layered_batch(&d, &kset, &ktilde, a, self.max_layers, &lcfg, self.layer_samples)?;
            let mut lest = est.clone();
            lest.seed = lcfg.seed;
            match layer_decay_fit(&traces, &lest) {
                Ok(f) => rep.metric(format!("{label}.layers.plain_alpha_hat"), f.alpha_hat),
                Err(e) => rep.note(format!("{label}: plain layer fit skipped: {e}")),
            }
            // the per-layer pass rate can be far below 1/n, so the fit runs on splitting stages
            let scfg = ctx.sampler_for(4 * k as u64 + 3, self.layer_t_max, self.dt_max);
            rep.seed(format!("{label}.layer_split"), &scfg);
            let stages = layered_splitting(&d, &kset, &ktilde, a, self.split_depth, &scfg, self.layer_samples)?;
            lest.seed = scfg.seed;
            let fit = layer_decay_split(&stages, self.layer_samples, &lest)?;
            rep.metric(format!("{label}.layers.alpha_hat"), fit.alpha_hat);
            rep.metric(format!("{label}.layers.ci_low"), fit.ci_low);
            rep.metric(format!("{label}.layers.ci_high"), fit.ci_high);
            rep.metric(format!("{label}.layers.depths"), fit.layers.len() as f64);
            rep.check(
                format!("{label}: layer decay CI excludes 1"),
                fit.ci_high < 1.0,
                format!("α̂ = {:.4} [{:.4}, {:.4}]", fit.alpha_hat, fit.ci_low, fit.ci_high),
            );
            let mk = minkowski_layer_check(&traces, self.p_stable, 5.min(self.max_layers))?;
            rep.metric(format!("{label}.layers.minkowski_increments"), mk.increments);
            rep.metric(format!("{label}.layers.minkowski_total"), mk.total);
            rep.check(
                format!("{label}: layer increments bound the p-th moment"),
                mk.holds,
                format!("{:.4} ≥ {:.4}", mk.increments, mk.total),
            );
            let n = self.layer_samples as f64;
            let mut p = 1.0;
            let rows = stages
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    p *= c as f64 / n;
                    let plain = traces.iter().filter(|t| t.layers_completed > j).count() as f64 / traces.len() as f64;
                    vec![(j + 1) as f64, p, plain]
                })
                .collect();
            rep.curve(format!("{label}.layer_survival"), &["layer", "fraction", "plain_fraction"], rows);

            // harmonic measure of the segments, seen from the start
            let wcfg = wos_sampler(ctx, 4 * k as u64 + 2);
            rep.seed(format!("{label}.wos"), &wcfg);
            let oracle = dashed_segments_series(x, r, self.start, 1e-10)?;
            let hits: usize = (0..self.wos_samples as u64)
                .into_par_iter()
                .map(|i| {
                    sample_exit_position_wos(&Domain::HalfPlane, self.start, &wcfg, i).map(|s| {
                        let px = s.position.x;
                        ((px - x * (px / x).round()).abs() <= r) as usize
                    })
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum();
            let u = hits as f64 / self.wos_samples as f64;
            rep.oracle(format!("{label}.harmonic_measure"), oracle.value);
            rep.metric(format!("{label}.harmonic_measure"), u);
            let gap = (u - oracle.value).abs();
            rep.check(
                format!("{label}: walk-on-spheres harmonic measure matches the series"),
                gap <= self.wos_tolerance,
                format!("{u:.4} vs {:.4} (|Δ| = {gap:.4})", oracle.value),
            );
        }
        rep.check("every tail-index CI covers 1/2", all_cover, format!("{} pairs", self.grid.len()));
        Ok(rep)
    }
}

/// Walk-on-spheres settings for sub-run `k`.
fn wos_sampler(ctx: &StudyContext, k: u64) -> SamplerConfig {
    let mut c = ctx.sampler_for(k, ctx.sampler.t_max, ctx.sampler.dt_max);
    c.scheme = Scheme::WalkOnSpheres;
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DashedWedgeParams {
    pub half_angle: f64,
    pub period: f64,
    pub gap: f64,
    pub start: Point,
    pub samples: usize,
    pub t_max: f64,
    pub dt_max: f64,
    pub lower_quantile: Option<f64>,
    /// Moment order for the condition check on `K̃ᶜ`.
    pub condition_p: f64,
    /// Grid `a = 1 + r·e^{iθ}` in `K`: radii and angle fractions `θ/α`.
    pub grid_radii: Vec<f64>,
    pub grid_angle_fractions: Vec<f64>,
    pub condition_samples: usize,
    pub condition_t_max: f64,
    pub stability_tolerance: f64,
    /// Radii `r` of the points `1 + r·e^{iα}` for the crossing-probability check.
    pub ray_radii: Vec<f64>,
    pub ray_samples: usize,
    /// Lower quantile for the solid-wedge comparison, whose tail is steeper.
    pub solid_lower_quantile: f64,
}

impl Default for DashedWedgeParams {
    fn default() -> Self {
        DashedWedgeParams {
            half_angle: PI / 4.0,
            period: 1.0,
            gap: 0.5,
            start: Point::new(-2.0, 0.0),
            samples: 100_000,
            t_max: 1e6,
            dt_max: 1e9,
            lower_quantile: None,
            condition_p: 1.0 / 3.0,
            grid_radii: vec![0.0, 1.0, 2.0, 4.0],
            grid_angle_fractions: vec![0.0, 0.5, 1.0],
            condition_samples: 20_000,
            condition_t_max: 1e6,
            stability_tolerance: 0.05,
            ray_radii: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            ray_samples: 20_000,
            solid_lower_quantile: 0.95,
        }
    }
}

impl Study for DashedWedgeParams {
    const NAME: &'static str = "dashed-wedge";

    fn validate(&self) -> Result<()> {
        if !(self.half_angle > 0.0 && self.half_angle <= PI / 2.0) {
            return Err(invalid("params.half_angle", "need 0 < α ≤ π/2"));
        }
        Domain::DashedWedge {
            half_angle: self.half_angle,
            period: self.period,
            gap: self.gap,
        }
        .validate()
        .map_err(|e| invalid("params", e.to_string()))?;
        if self.grid_radii.iter().any(|&r| !(r >= 0.0)) {
            return Err(invalid("params.grid_radii", "radii must be nonnegative"));
        }
        if self.grid_angle_fractions.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(invalid("params.grid_angle_fractions", "fractions must lie in [0, 1]"));
        }
        if self.ray_radii.iter().any(|&r| !(r > 0.0)) {
            return Err(invalid("params.ray_radii", "radii must be positive"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
        self.condition_samples = n;
        self.ray_samples = n;
    }

    fn set_t_max(&mut self, t: f64) {
        self.t_max = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let alpha = self.half_angle;
        let est = ctx.estimator_with(self.lower_quantile);
        let u = Domain::DashedWedge {
            half_angle: alpha,
            period: self.period,
            gap: self.gap,
        };
        let bh1 = PI / (4.0 * alpha);
        let bh2 = PI / (4.0 * (PI - alpha));
        let target = bh1.min(bh2);
        rep.domain("dashed_wedge", &u);
        rep.oracle("bh_inner", bh1);
        rep.oracle("bh_outer", bh2);
        rep.oracle("bh", target);

        // (a) moments of T(K̃ᶜ) from a ∈ K: K̃ᶜ is the wedge W₁ shifted by -1
        let w1 = Domain::Wedge { half_angle: alpha };
        rep.domain("inner_wedge", &w1);
        let mut sup = 0.0f64;
        let mut rows = Vec::new();
        let mut stable = true;
        let mut sub = 16u64;
        for &r in &self.grid_radii {
            for &f in &self.grid_angle_fractions {
                if r == 0.0 && f > 0.0 {
                    continue;
                }
                let a = Point::new(1.0, 0.0) + Point::polar(r, f * alpha);
                let cfg = ctx.sampler_for(sub, 2.0 * self.condition_t_max, self.dt_max);
                sub += 1;
                let b = sample_batch(&w1, a + Point::new(1.0, 0.0), &cfg, self.condition_samples)?;
                let m1 = truncated_moment(&b, self.condition_p, Some(self.condition_t_max), &est)?;
                let m2 = truncated_moment(&b, self.condition_p, None, &est)?;
                let ch = rel_change(m2.value, m1.value);
                stable &= ch < self.stability_tolerance;
                sup = sup.max(m2.value);
                rows.push(vec![a.x, a.y, m2.value, m2.stderr, ch]);
            }
        }
        rep.metric("condition_moment.sup", sup);
        rep.check(
            "sup of E_a[T(K̃ᶜ)^p] over the K grid is finite and stable",
            sup.is_finite() && stable,
            format!("sup {sup:.4} over {} points", rows.len()),
        );
        rep.curve("condition_moment", &["ax", "ay", "moment", "stderr", "rel_change"], rows);

        // (c) P_a(T(U) < T(K̃ᶜ)) along the ray 1 + r·e^{iα}
        let k = LayerSet::WedgeClosure {
            apex: Point::new(1.0, 0.0),
            direction: 0.0,
            half_angle: alpha,
        };
        let ktilde = LayerSet::WedgeClosure {
            apex: Point::new(-1.0, 0.0),
            direction: PI,
            half_angle: PI - alpha,
        };
        let mut rows = Vec::new();
        let mut inf_lo = f64::INFINITY;
        for &r in &self.ray_radii {
            // a hair inside K so the start is not lost to rounding
            let a = Point::new(1.0, 0.0) + Point::polar(r, alpha * (1.0 - 1e-9));
            let cfg = ctx.sampler_for(sub, self.condition_t_max, self.dt_max);
            sub += 1;
            let traces = layered_batch(&u, &k, &ktilde, a, 1, &cfg, self.ray_samples)?;
            let hits = traces.iter().filter(|t| t.exited_first).count();
            let (lo, hi) = binomial_ci(hits, traces.len(), est.ci_level);
            let p = hits as f64 / traces.len() as f64;
            inf_lo = inf_lo.min(lo);
            rows.push(vec![r, p, lo, hi]);
        }
        rep.metric("crossing_probability.inf_lower", inf_lo);
        rep.check(
            "P_a(T(U) < T(K̃ᶜ)) strictly positive on the ray grid",
            inf_lo > 0.0,
            format!("smallest lower confidence bound {inf_lo:.4}"),
        );
        rep.curve("crossing_probability", &["r", "p", "lo", "hi"], rows);

        // (b) the tail of T(U)
        let cfg = ctx.sampler_for(0, self.t_max, self.dt_max);
        rep.seed("dashed_wedge", &cfg);
        let b = sample_batch(&u, self.start, &cfg, self.samples)?;
        let e = tail_index(&b, TailMethod::LogLogLS, None, &est)?;
        rep.tail("tail", &e);
        rep.check(
            "tail-index CI covers min(bh(W₁), bh(W₂))",
            e.covers(target),
            format!("{:.4} [{:.4}, {:.4}] vs {target:.4}", e.exponent, e.ci_low, e.ci_high),
        );
        let s = survival_curve(&b, &log_points(1.0, self.t_max / 2.0, 30), est.ci_level)?;
        rep.survival("survival", &s);

        // without gaps, a start inside W₁ sees only W₁
        let cfg = ctx.sampler_for(1, self.t_max, self.dt_max);
        rep.seed("solid_wedge", &cfg);
        let b = sample_batch(&w1, Point::new(1.0, 0.0), &cfg, self.samples)?;
        let e = tail_index(&b, TailMethod::LogLogLS, None, &ctx.estimator_with(Some(self.solid_lower_quantile)))?;
        rep.tail("solid_tail", &e);
        rep.check(
            "solid boundary: tail-index CI covers bh(W₁)",
            e.covers(bh1),
            format!("{:.4} [{:.4}, {:.4}] vs {bh1:.4}", e.exponent, e.ci_low, e.ci_high),
        );
        Ok(rep)
    }
}
