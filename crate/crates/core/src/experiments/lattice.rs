//! Disk lattices: the full lattice, the lattice with its left half cleared,
//! and the lattice with the disks inside a wedge removed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{invalid, log_points, rel_change, Report, Study, StudyContext};
use crate::error::Result;
use crate::estimators::{rolling_tail_slopes, slope_growth_per_decade, survival_curve, tail_index, truncated_moment, TailMethod};
use crate::geometry::{CenterMask, Domain, LatticeBasis, Point};
use crate::sampler::sample_batch;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeParams {
    pub generators: LatticeBasis,
    pub hole_radius: f64,
    pub start: Point,
    pub samples: usize,
    /// Moments are compared at this horizon and at twice it.
    pub t_max: f64,
    pub dt_max: f64,
    pub moments: Vec<f64>,
    pub stability_tolerance: f64,
    pub windows: usize,
    pub min_survivors: usize,
    /// Smallest accepted increase of the local exponent per decade of `t`.
    pub min_slope_growth: f64,
    pub edge_removal: Option<EdgeRemovalParams>,
    pub wedge_complement: Option<WedgeComplementParams>,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams {
            generators: LatticeBasis::unit_square(),
            hole_radius: 0.25,
            start: Point::new(0.5, 0.5),
            samples: 100_000,
            t_max: 100.0,
            dt_max: 1.0,
            moments: vec![1.0, 2.0, 3.0],
            stability_tolerance: 0.05,
            windows: 4,
            min_survivors: 100,
            min_slope_growth: 1.0,
            edge_removal: Some(EdgeRemovalParams::default()),
            wedge_complement: Some(WedgeComplementParams::default()),
        }
    }
}

impl LatticeParams {
    fn domain(&self) -> Domain {
        Domain::DiskLattice {
            generators: self.generators.clone(),
            hole_radius: self.hole_radius,
        }
    }
}

impl Study for LatticeParams {
    const NAME: &'static str = "disk-lattice";

    fn validate(&self) -> Result<()> {
        let d = self.domain();
        d.validate().map_err(|e| invalid("params.hole_radius", e.to_string()))?;
        if !d.contains(self.start) {
            return Err(invalid("params.start", "start lies inside a hole"));
        }
        if self.moments.iter().any(|&p| !(p > 0.0)) {
            return Err(invalid("params.moments", "moment orders must be positive"));
        }
        if self.windows < 2 {
            return Err(invalid("params.windows", "need at least 2 windows"));
        }
        if let Some(e) = &self.edge_removal {
            e.validate()?;
        }
        if let Some(w) = &self.wedge_complement {
            w.validate()?;
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
        if let Some(e) = &mut self.edge_removal {
            e.set_samples(n);
        }
        if let Some(w) = &mut self.wedge_complement {
            w.set_samples(n);
        }
    }

    fn set_t_max(&mut self, t: f64) {
        self.t_max = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let d = self.domain();
        let est = &ctx.estimator;
        let cfg = ctx.sampler_for(0, 2.0 * self.t_max, self.dt_max);
        rep.domain("lattice", &d);
        rep.seed("lattice", &cfg);
        let long = sample_batch(&d, self.start, &cfg, self.samples)?;
        rep.metric("truncated", long.truncated_count() as f64);
        for &p in &self.moments {
            let m1 = truncated_moment(&long, p, Some(self.t_max), est)?;
            let m2 = truncated_moment(&long, p, None, est)?;
            let change = rel_change(m2.value, m1.value);
            rep.moment(&format!("moment_{p}"), &m2);
            rep.metric(format!("moment_{p}.rel_change"), change);
            rep.check(
                format!("p = {p} moment stabilizes"),
                change < self.stability_tolerance,
                format!("{:.5} → {:.5} (relative change {change:.2e})", m1.value, m2.value),
            );
        }
        let slopes = rolling_tail_slopes(&long, self.windows, self.min_survivors)?;
        let (rate, monotone) = slope_growth_per_decade(&slopes);
        rep.metric("slopes.growth_per_decade", rate);
        rep.check(
            "local tail exponent increases: power law rejected",
            monotone && rate > self.min_slope_growth,
            format!("{rate:.3} per decade, monotone: {monotone}"),
        );
        let rows = slopes.iter().map(|w| vec![w.t1, w.t2, w.exponent]).collect();
        rep.curve("rolling_slopes", &["t1", "t2", "exponent"], rows);
        let hi = slopes.last().map_or(self.t_max, |w| w.t2);
        let s = survival_curve(&long, &log_points(hi * 1e-3, hi, 30), est.ci_level)?;
        rep.survival("survival", &s);

        if let Some(e) = &self.edge_removal {
            e.run_into(&mut rep, ctx, "edge_removal", 100)?;
        }
        if let Some(w) = &self.wedge_complement {
            w.run_into(&mut rep, ctx, "wedge_complement", 200)?;
        }
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeRemovalParams {
    pub hole_radius: f64,
    pub start: Point,
    pub samples: usize,
    pub t_max: f64,
    pub dt_max: f64,
    pub lower_quantile: Option<f64>,
}

impl Default for EdgeRemovalParams {
    fn default() -> Self {
        EdgeRemovalParams {
            hole_radius: 0.25,
            start: Point::new(-0.5, 0.5),
            samples: 100_000,
            t_max: 1e6,
            dt_max: 1e9,
            lower_quantile: None,
        }
    }
}

impl EdgeRemovalParams {
    fn domain(&self) -> Domain {
        Domain::GraphComplement {
            hole_radius: self.hole_radius,
            mask: CenterMask::RightHalfPlane,
        }
    }

    fn run_into(&self, rep: &mut Report, ctx: &StudyContext, label: &str, sub: u64) -> Result<()> {
        let d = self.domain();
        let cfg = ctx.sampler_for(sub, self.t_max, self.dt_max);
        rep.domain(label, &d);
        rep.seed(label, &cfg);
        rep.oracle(format!("{label}.bh"), 0.5);
        let b = sample_batch(&d, self.start, &cfg, self.samples)?;
        let e = tail_index(&b, TailMethod::LogLogLS, None, &ctx.estimator_with(self.lower_quantile))?;
        rep.tail(&format!("{label}.tail"), &e);
        rep.check(
            format!("{label}: tail-index CI covers 1/2"),
            e.covers(0.5),
            format!("{:.4} [{:.4}, {:.4}]", e.exponent, e.ci_low, e.ci_high),
        );
        Ok(())
    }
}

impl Study for EdgeRemovalParams {
    const NAME: &'static str = "edge-removal";

    fn validate(&self) -> Result<()> {
        let d = self.domain();
        d.validate()
            .map_err(|e| invalid("params.hole_radius", e.to_string()))?;
        if !d.contains(self.start) {
            return Err(invalid("params.start", "start lies inside a hole"));
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
        self.run_into(&mut rep, ctx, "edge_removal", 0)?;
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WedgeComplementParams {
    pub half_angle: f64,
    pub hole_radius: f64,
    pub start: Point,
    pub samples: usize,
    pub t_max: f64,
    pub dt_max: f64,
    /// The exit-time tail is steep, so the fit starts further out.
    pub lower_quantile: Option<f64>,
}

impl Default for WedgeComplementParams {
    fn default() -> Self {
        WedgeComplementParams {
            half_angle: PI / 8.0,
            hole_radius: 0.25,
            start: Point::new(10.0, 0.0),
            samples: 100_000,
            t_max: 1e4,
            dt_max: 1e9,
            lower_quantile: Some(0.95),
        }
    }
}

impl WedgeComplementParams {
    fn domain(&self) -> Domain {
        Domain::GraphComplement {
            hole_radius: self.hole_radius,
            mask: CenterMask::OutsideWedge {
                half_angle: self.half_angle,
            },
        }
    }

    fn run_into(&self, rep: &mut Report, ctx: &StudyContext, label: &str, sub: u64) -> Result<()> {
        let d = self.domain();
        let target = PI / (4.0 * self.half_angle);
        let cfg = ctx.sampler_for(sub, self.t_max, self.dt_max);
        rep.domain(label, &d);
        rep.seed(label, &cfg);
        rep.oracle(format!("{label}.bh"), target);
        let b = sample_batch(&d, self.start, &cfg, self.samples)?;
        let e = tail_index(&b, TailMethod::LogLogLS, None, &ctx.estimator_with(self.lower_quantile))?;
        rep.tail(&format!("{label}.tail"), &e);
        rep.check(
            format!("{label}: tail-index CI covers π/(4α)"),
            e.covers(target),
            format!("{:.4} [{:.4}, {:.4}] vs {target:.4}", e.exponent, e.ci_low, e.ci_high),
        );
        Ok(())
    }
}

impl Study for WedgeComplementParams {
    const NAME: &'static str = "wedge-complement";

    fn validate(&self) -> Result<()> {
        if !(self.half_angle > 0.0 && self.half_angle < PI / 2.0) {
            return Err(invalid("params.half_angle", "need 0 < α < π/2"));
        }
        let d = self.domain();
        d.validate()
            .map_err(|e| invalid("params.hole_radius", e.to_string()))?;
        if !d.contains(self.start) {
            return Err(invalid("params.start", "start lies inside a hole"));
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
        self.run_into(&mut rep, ctx, "wedge_complement", 0)?;
        Ok(rep)
    }
}
