//! The staircase construction: budgets, the radius search, the growth ratio
//! along the staircase and the critical-moment checks.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::{invalid, Report, Study, StudyContext};
use crate::error::{Error, Result};
use crate::estimators::{tail_index, truncated_moment, TailMethod};
use crate::geometry::{Domain, Point, Stage, StaircaseWedge, Terminal};
use crate::oracles::wedge_mean;
use crate::sampler::{sample_batch, splitting_batch, SampleBatch, Splitting};
use crate::stats::{mean_ci, ols, z_value, MeanCi};

/// `α_n = (π/4)(1 − 2^{−(n+1)})`.
pub fn angle_schedule(n: usize) -> f64 {
    FRAC_PI_4 * (1.0 - 0.5f64.powi(n as i32 + 1))
}

/// `u(z) = (x²tan²α − y²)/(1 − tan²α)`, which satisfies `½Δu = −1`, so that
/// `E_a[T ∧ t] = u(a) − E_a[u(B_{T∧t})]` for any domain inside the wedge.
pub fn dynkin_wedge(alpha: f64, z: Point) -> f64 {
    let t2 = alpha.tan().powi(2);
    (z.x * z.x * t2 - z.y * z.y) / (1.0 - t2)
}

/// `budget_n = C·(2 − 2^{−n})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSchedule {
    pub c: f64,
    /// `budgets[n − 1] = budget_n`.
    pub budgets: Vec<f64>,
}

impl BudgetSchedule {
    pub fn new(c: f64, stages: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("base budget must be positive, got {c}")));
        }
        let budgets = (1..=stages).map(|n| c * (2.0 - 0.5f64.powi(n as i32))).collect();
        Ok(BudgetSchedule { c, budgets })
    }

    /// Budget of stage `n ≥ 1`.
    pub fn budget(&self, n: usize) -> f64 {
        self.budgets[n - 1]
    }
}

/// Estimator a certificate is judged by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertEstimator {
    /// Sample mean of `T ∧ t_max`.
    #[default]
    Plain,
    /// `u_n(a) − u_n(B_{T∧t})` per path: same paths, finite variance.
    Dynkin,
}

/// A Monte Carlo estimate of `E_{(1,0)}[T(D_n)]` for one candidate radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub stage: usize,
    pub radius: f64,
    pub budget: f64,
    pub samples: usize,
    pub t_max: f64,
    pub seed: u64,
    pub estimator: CertEstimator,
    /// Mean, standard error and upper interval end of `estimator`.
    pub mean: f64,
    pub stderr: f64,
    pub ci_high: f64,
    pub level: f64,
    pub truncation_share: f64,
    /// `u(a) − mean u(B_{T∧t})` with the stage's wedge function.
    pub plain_mean: f64,
    pub plain_stderr: f64,
    pub dynkin_mean: f64,
    pub dynkin_stderr: f64,
    pub certified: bool,
    pub retried: bool,
    /// Splitting estimate of the same mean and its standard error; computed for
    /// accepted radii only.
    pub split_mean: Option<f64>,
    pub split_stderr: Option<f64>,
}

/// One evaluation of the radius search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub radius: f64,
    pub bisection: bool,
    pub mean: f64,
    pub ci_high: f64,
    pub samples: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircasePlan {
    /// `α_1, …, α_N`.
    pub angles: Vec<f64>,
    /// `R_1, …, R_N`; `R_1 = 0` (stage 1 is the whole wedge).
    pub radii: Vec<f64>,
    pub schedule: BudgetSchedule,
    /// Stage-1 estimate that fixes `C`.
    pub base: MeanCi,
    pub base_oracle: f64,
    /// Certificates of stages `2..=N`.
    pub certificates: Vec<Certificate>,
    /// Mean at `2R_n` for the monotonicity check, per certified stage.
    pub doubled: Vec<Certificate>,
    pub searches: Vec<Vec<SearchStep>>,
}

impl StaircasePlan {
    pub fn stages(&self) -> usize {
        self.angles.len()
    }

    pub fn staircase(&self, n: usize) -> StaircaseWedge {
        staircase_of(&self.angles[..n], &self.radii[..n])
    }

    /// `D_n`.
    pub fn domain(&self, n: usize) -> Domain {
        Domain::StaircaseWedge(self.staircase(n))
    }
}

fn staircase_of(angles: &[f64], radii: &[f64]) -> StaircaseWedge {
    StaircaseWedge {
        stages: angles
            .iter()
            .zip(radii)
            .map(|(&angle, &radius)| Stage { angle, radius })
            .collect(),
        terminal: Terminal::LastStage,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaircaseParams {
    /// Deepest stage `N`.
    pub stages: usize,
    pub samples: usize,
    pub level: f64,
    /// Every run uses `t_max = horizon_factor · r_cap²`, so that candidate
    /// radii share their paths up to the first visit near the cut.
    pub horizon_factor: f64,
    /// Smallest radius tried at stage 2; later stages start at `2R_{n−1}`.
    pub r_start: f64,
    pub r_cap: f64,
    /// Samples per candidate while searching; the chosen radius is then
    /// certified with `samples`.
    pub pilot_samples: usize,
    pub bisection_steps: usize,
    pub max_truncation_share: f64,
    /// A failed candidate whose mean is within budget is rerun once with this
    /// many times the samples.
    pub retry_factor: usize,
    pub estimator: CertEstimator,
    /// Roots of the splitting estimate stored with each accepted radius; 0 skips it.
    pub split_samples: usize,
}

impl Default for StaircaseParams {
    fn default() -> Self {
        StaircaseParams {
            stages: 5,
            samples: 100_000,
            level: 0.99,
            horizon_factor: 1e8,
            r_start: 2.0,
            r_cap: 1e6,
            pilot_samples: 10_000,
            bisection_steps: 4,
            max_truncation_share: 0.01,
            retry_factor: 4,
            estimator: CertEstimator::Plain,
            split_samples: 5_000,
        }
    }
}

const START: Point = Point::new(1.0, 0.0);

impl StaircaseParams {
    fn t_max(&self) -> f64 {
        self.horizon_factor * self.r_cap.max(1.0).powi(2)
    }

    fn check(&self) -> Result<()> {
        if !(2..=12).contains(&self.stages) {
            return Err(invalid("params.stages", "need 2 ≤ N ≤ 12"));
        }
        if self.samples < 100 {
            return Err(invalid("params.samples", "need at least 100 samples"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid("params.level", "must lie in (0, 1)"));
        }
        if !(self.horizon_factor > 0.0 && self.r_start > 0.0 && self.r_cap > self.r_start) {
            return Err(invalid("params", "need horizon_factor > 0 and 0 < r_start < r_cap"));
        }
        if self.retry_factor < 1 {
            return Err(invalid("params.retry_factor", "must be at least 1"));
        }
        Ok(())
    }

    /// `E_{(1,0)}[T]` for the staircase `angles`/`radii` (stage `n = angles.len()`).
    fn evaluate(&self, ctx: &StudyContext, angles: &[f64], radii: &[f64], samples: usize, budget: f64) -> Result<Certificate> {
        let n = angles.len();
        let radius = radii[n - 1];
        let d = Domain::StaircaseWedge(StaircaseWedge::new(
            angles.iter().zip(radii).map(|(&angle, &radius)| Stage { angle, radius }).collect(),
            Terminal::LastStage,
        )?);
        let t_max = self.t_max();
        // common random numbers across radii and stages: paths agree with the
        // previous stage's until they reach the new radius
        let cfg = ctx.sampler_for(1000, t_max, t_max / 10.0);
        let b = sample_batch(&d, START, &cfg, samples)?;
        let plain = mean_ci(&b.times()?, self.level);
        let dynkin = mean_ci(&dynkin_values(&b, angles[n - 1], START), self.level);
        let ci = match self.estimator {
            CertEstimator::Plain => plain,
            CertEstimator::Dynkin => dynkin,
        };
        let share = truncated_moment(&b, 1.0, None, &ctx.estimator)?.truncation_share;
        Ok(Certificate {
            stage: n,
            radius,
            budget,
            samples,
            t_max,
            seed: cfg.seed,
            estimator: self.estimator,
            mean: ci.mean,
            stderr: ci.stderr,
            ci_high: ci.hi,
            level: self.level,
            truncation_share: share,
            plain_mean: plain.mean,
            plain_stderr: plain.stderr,
            dynkin_mean: dynkin.mean,
            dynkin_stderr: dynkin.stderr,
            certified: share < self.max_truncation_share && ci.hi <= budget,
            retried: false,
            split_mean: None,
            split_stderr: None,
        })
    }

    fn add_split(&self, ctx: &StudyContext, c: &mut Certificate, d: &Domain) -> Result<()> {
        if self.split_samples == 0 {
            return Ok(());
        }
        let cfg = ctx.sampler_for(1001, c.t_max, c.t_max / 10.0);
        let roots = splitting_batch(d, START, &cfg, &Splitting::default(), self.split_samples)?;
        let v: Vec<f64> = roots.iter().map(|r| r.value).collect();
        let ci = mean_ci(&v, self.level);
        c.split_mean = Some(ci.mean);
        c.split_stderr = Some(ci.stderr);
        Ok(())
    }
}

fn dynkin_values(b: &SampleBatch, alpha: f64, a: Point) -> Vec<f64> {
    let u0 = dynkin_wedge(alpha, a);
    b.samples.iter().map(|s| u0 - dynkin_wedge(alpha, s.position)).collect()
}

/// Searches `R_n` for stage `n ≥ 2` on top of the stages already in `angles`/`radii`:
/// doubling until a radius certifies on `pilot_samples`, then geometric
/// bisection toward the last failure. The smallest passing radius is then
/// certified on `samples` (doubling again on failure). Returns the
/// certificate and the search trace.
pub fn choose_radius(
    n: usize,
    angles: &[f64],
    radii: &[f64],
    budget: f64,
    params: &StaircaseParams,
    ctx: &StudyContext,
) -> Result<(Certificate, Vec<SearchStep>)> {
    if n < 2 || angles.len() != n - 1 || radii.len() != n - 1 {
        return Err(Error::InvalidArgument(format!("stage {n} needs the {} earlier stages", n.saturating_sub(1))));
    }
    let alpha = angle_schedule(n);
    let prev = radii[n - 2];
    let mut trace = Vec::new();
    let pilot = params.pilot_samples.clamp(100, params.samples);
    let attempt = |r: f64, samples: usize, bisection: bool, trace: &mut Vec<SearchStep>| -> Result<Certificate> {
        let mut a = angles.to_vec();
        let mut rr = radii.to_vec();
        a.push(alpha);
        rr.push(r);
        let mut c = params.evaluate(ctx, &a, &rr, samples, budget)?;
        trace.push(step(&c, bisection));
        if samples == params.samples && !c.certified && c.mean <= budget && params.retry_factor > 1 {
            c = params.evaluate(ctx, &a, &rr, samples * params.retry_factor, budget)?;
            c.retried = true;
            trace.push(step(&c, bisection));
        }
        Ok(c)
    };
    let exhausted = || Error::SearchExhausted {
        stage: n,
        cap: params.r_cap,
        budget,
    };
    let mut r = params.r_start.max(2.0 * prev);
    let mut fail: Option<f64> = None;
    let mut ok = loop {
        if r > params.r_cap {
            return Err(exhausted());
        }
        let c = attempt(r, pilot, false, &mut trace)?;
        if c.certified {
            break c;
        }
        fail = Some(r);
        r *= 2.0;
    };
    if let Some(mut lo) = fail {
        for _ in 0..params.bisection_steps {
            let mid = (lo * ok.radius).sqrt();
            let c = attempt(mid, pilot, true, &mut trace)?;
            if c.certified {
                ok = c;
            } else {
                lo = mid;
            }
        }
    }
    let mut r = ok.radius;
    while ok.samples < params.samples {
        if r > params.r_cap {
            return Err(exhausted());
        }
        let c = attempt(r, params.samples, false, &mut trace)?;
        if c.certified {
            ok = c;
        }
        r *= 2.0;
    }
    Ok((ok, trace))
}

fn step(c: &Certificate, bisection: bool) -> SearchStep {
    SearchStep {
        radius: c.radius,
        bisection,
        mean: c.mean,
        ci_high: c.ci_high,
        samples: c.samples,
        certified: c.certified,
    }
}

/// Runs stage 1 and the radius search for stages `2..=N`.
pub fn build_plan(params: &StaircaseParams, ctx: &StudyContext) -> Result<StaircasePlan> {
    params.check()?;
    let a1 = angle_schedule(1);
    let base_oracle = wedge_mean(a1, START)?;
    let d1 = Domain::Wedge { half_angle: a1 };
    let t_max = params.t_max();
    let cfg = ctx.sampler_for(1000, t_max, t_max / 10.0);
    let b = sample_batch(&d1, START, &cfg, params.samples)?;
    let base = mean_ci(&b.times()?, params.level);
    let schedule = BudgetSchedule::new(base.mean, params.stages)?;
    let mut angles = vec![a1];
    let mut radii = vec![0.0];
    let mut certificates = Vec::new();
    let mut doubled = Vec::new();
    let mut searches = Vec::new();
    for n in 2..=params.stages {
        let budget = schedule.budget(n);
        let (mut c, trace) = choose_radius(n, &angles, &radii, budget, params, ctx)?;
        angles.push(angle_schedule(n));
        radii.push(c.radius);
        params.add_split(ctx, &mut c, &Domain::StaircaseWedge(staircase_of(&angles, &radii)))?;
        let mut r2 = radii.clone();
        r2[n - 1] = 2.0 * c.radius;
        doubled.push(params.evaluate(ctx, &angles, &r2, c.samples, budget)?);
        certificates.push(c);
        searches.push(trace);
    }
    Ok(StaircasePlan {
        angles,
        radii,
        schedule,
        base,
        base_oracle,
        certificates,
        doubled,
        searches,
    })
}

impl Study for StaircaseParams {
    const NAME: &'static str = "staircase-budget";

    fn validate(&self) -> Result<()> {
        self.check()
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
        self.split_samples = self.split_samples.min(n);
    }

    fn set_t_max(&mut self, t: f64) {
        self.horizon_factor = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let plan = build_plan(self, ctx)?;
        report_plan(&mut rep, &plan);
        let z = z_value(self.level);
        let c = plan.schedule.c;
        rep.check(
            "stage-1 mean matches the wedge formula",
            (plan.base.mean - plan.base_oracle).abs() <= z * plan.base.stderr,
            format!(
                "{:.5} ± {:.5} vs {:.5}",
                plan.base.mean,
                z * plan.base.stderr,
                plan.base_oracle
            ),
        );
        let all = plan.certificates.iter().all(|c| c.certified && c.ci_high <= c.budget);
        rep.check(
            "every stage certified: CI upper bound within budget",
            all,
            format!("stages 2..={}", plan.stages()),
        );
        let increasing = plan.schedule.budgets.windows(2).all(|w| w[1] > w[0]);
        let capped = plan.schedule.budgets.iter().all(|&b| b < 2.0 * c);
        rep.check("budgets increase and stay below 2C", increasing && capped, format!("C = {c:.5}"));
        let mut means = vec![(plan.base.mean, plan.base.stderr)];
        means.extend(plan.certificates.iter().map(|c| (c.mean, c.stderr)));
        let monotone = means
            .windows(2)
            .all(|w| w[1].0 + z * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt() >= w[0].0);
        rep.check("certified means increase across stages (within CI)", monotone, "");
        let deepest = plan.certificates.last().expect("at least stage 2");
        rep.check(
            "deepest-stage mean at most 2C",
            deepest.mean <= 2.0 * c + z * deepest.stderr,
            format!("{:.5} vs 2C = {:.5}", deepest.mean, 2.0 * c),
        );
        for (c, d) in plan.certificates.iter().zip(&plan.doubled) {
            let slack = z * (c.stderr.powi(2) + d.stderr.powi(2)).sqrt();
            rep.check(
                format!("stage {}: mean at 2R within slack of mean at R", c.stage),
                d.mean <= c.mean + slack,
                format!("{:.5} at 2R vs {:.5} + {slack:.5}", d.mean, c.mean),
            );
        }
        Ok(rep)
    }
}

fn report_plan(rep: &mut Report, plan: &StaircasePlan) {
    rep.oracle("stage1.wedge_mean", plan.base_oracle);
    rep.metric("C", plan.schedule.c);
    rep.metric("stage1.stderr", plan.base.stderr);
    for (k, (&a, &r)) in plan.angles.iter().zip(&plan.radii).enumerate() {
        rep.metric(format!("stage{}.angle", k + 1), a);
        rep.metric(format!("stage{}.radius", k + 1), r);
        rep.metric(format!("stage{}.budget", k + 1), plan.schedule.budget(k + 1));
    }
    for c in &plan.certificates {
        let s = format!("stage{}", c.stage);
        rep.metric(format!("{s}.mean"), c.mean);
        rep.metric(format!("{s}.stderr"), c.stderr);
        rep.metric(format!("{s}.ci_high"), c.ci_high);
        rep.metric(format!("{s}.plain_mean"), c.plain_mean);
        rep.metric(format!("{s}.plain_stderr"), c.plain_stderr);
        rep.metric(format!("{s}.dynkin_mean"), c.dynkin_mean);
        rep.metric(format!("{s}.dynkin_stderr"), c.dynkin_stderr);
        rep.metric(format!("{s}.truncation_share"), c.truncation_share);
        rep.metric(format!("{s}.samples"), c.samples as f64);
        if let (Some(m), Some(se)) = (c.split_mean, c.split_stderr) {
            rep.metric(format!("{s}.split_mean"), m);
            rep.metric(format!("{s}.split_stderr"), se);
        }
        rep.seeds.insert(s, c.seed);
    }
    let mut rows = vec![vec![1.0, plan.angles[0], 0.0, plan.schedule.budget(1), plan.base.mean, plan.base.hi]];
    rows.extend(
        plan.certificates
            .iter()
            .map(|c| vec![c.stage as f64, plan.angles[c.stage - 1], c.radius, c.budget, c.mean, c.ci_high]),
    );
    rep.curve("plan", &["stage", "angle", "radius", "budget", "mean", "ci_high"], rows);
    let rows = plan
        .searches
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            s.iter().map(move |st| {
                vec![
                    (k + 2) as f64,
                    st.radius,
                    st.bisection as u8 as f64,
                    st.samples as f64,
                    st.mean,
                    st.ci_high,
                    st.certified as u8 as f64,
                ]
            })
        })
        .collect();
    rep.curve(
        "search",
        &["stage", "radius", "bisection", "samples", "mean", "ci_high", "certified"],
        rows,
    );
}

/// Where a study gets its staircase from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSource {
    /// Run the radius search.
    Search(StaircaseParams),
    /// Use given radii `R_2, …, R_N` with the default angle schedule; `C` is
    /// taken from the wedge formula.
    Radii { radii: Vec<f64> },
}

impl Default for PlanSource {
    fn default() -> Self {
        PlanSource::Search(StaircaseParams::default())
    }
}

impl PlanSource {
    fn check(&self) -> Result<()> {
        match self {
            PlanSource::Search(p) => p.check(),
            PlanSource::Radii { radii } => {
                if radii.is_empty() {
                    return Err(invalid("params.plan.radii", "need at least R_2"));
                }
                if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("params.plan.radii", "radii must be positive and strictly increasing"));
                }
                Ok(())
            }
        }
    }

    pub fn resolve(&self, ctx: &StudyContext) -> Result<StaircasePlan> {
        match self {
            PlanSource::Search(p) => build_plan(p, ctx),
            PlanSource::Radii { radii } => {
                let n = radii.len() + 1;
                let oracle = wedge_mean(angle_schedule(1), START)?;
                let mut r = vec![0.0];
                r.extend(radii);
                Ok(StaircasePlan {
                    angles: (1..=n).map(angle_schedule).collect(),
                    radii: r,
                    schedule: BudgetSchedule::new(oracle, n)?,
                    base: MeanCi {
                        mean: oracle,
                        stderr: 0.0,
                        lo: oracle,
                        hi: oracle,
                        n: 0,
                        level: 1.0,
                    },
                    base_oracle: oracle,
                    certificates: Vec::new(),
                    doubled: Vec::new(),
                    searches: Vec::new(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthRatioParams {
    pub plan: PlanSource,
    pub samples: usize,
    pub level: f64,
    pub horizon_factor: f64,
    /// Stages whose pure wedge is checked against the scaling identity.
    pub sanity_stages: Vec<usize>,
    pub sanity_radii: Vec<f64>,
    pub sanity_horizon_factor: f64,
    /// Roots of the splitting estimates used by the pure-wedge checks.
    pub split_samples: usize,
    /// Stage whose wedge is used for the strong-Markov decomposition check.
    pub decomposition_stage: usize,
}

impl Default for GrowthRatioParams {
    fn default() -> Self {
        GrowthRatioParams {
            plan: PlanSource::default(),
            samples: 100_000,
            level: 0.99,
            horizon_factor: 1e8,
            sanity_stages: vec![1, 2],
            sanity_radii: vec![1.0, 10.0],
            sanity_horizon_factor: 1e20,
            split_samples: 50_000,
            decomposition_stage: 2,
        }
    }
}

impl GrowthRatioParams {
    /// Splitting estimate of `E_a[T ∧ t_max]` and the mean truncated weight.
    fn split_mean(&self, ctx: &StudyContext, sub: u64, d: &Domain, a: Point, t_max: f64) -> Result<(MeanCi, f64)> {
        let cfg = ctx.sampler_for(sub, t_max, t_max / 10.0);
        let roots = splitting_batch(d, a, &cfg, &Splitting::default(), self.split_samples)?;
        let v: Vec<f64> = roots.iter().map(|r| r.value).collect();
        let tw = roots.iter().map(|r| r.truncated_weight).sum::<f64>() / roots.len() as f64;
        Ok((mean_ci(&v, self.level), tw))
    }
}

impl Study for GrowthRatioParams {
    const NAME: &'static str = "growth-ratio";

    fn validate(&self) -> Result<()> {
        self.plan.check()?;
        let stages = match &self.plan {
            PlanSource::Search(p) => p.stages,
            PlanSource::Radii { radii } => radii.len() + 1,
        };
        if stages < 4 {
            return Err(invalid("params.plan", "the growth ratio needs at least 4 stages"));
        }
        if self.sanity_stages.iter().any(|&s| s == 0 || s > stages) {
            return Err(invalid("params.sanity_stages", "stages must lie in 1..=N"));
        }
        if self.decomposition_stage == 0 || self.decomposition_stage > stages {
            return Err(invalid("params.decomposition_stage", "must lie in 1..=N"));
        }
        if self.sanity_radii.iter().any(|&r| !(r > 0.0)) {
            return Err(invalid("params.sanity_radii", "radii must be positive"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid("params.level", "must lie in (0, 1)"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
        self.split_samples = self.split_samples.min(n);
        if let PlanSource::Search(p) = &mut self.plan {
            p.set_samples(n);
        }
    }

    fn set_t_max(&mut self, t: f64) {
        self.horizon_factor = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let plan = self.plan.resolve(ctx)?;
        report_plan(&mut rep, &plan);
        growth_ratio_into(&mut rep, self, &plan, ctx)?;
        Ok(rep)
    }
}

/// The per-stage growth ratio, its trend, and the pure-wedge checks.
pub(crate) fn growth_ratio_into(
    rep: &mut Report,
    p: &GrowthRatioParams,
    plan: &StaircasePlan,
    ctx: &StudyContext,
) -> Result<()> {
    let z = z_value(p.level);
    let mut ns = Vec::new();
    let mut ratios = Vec::new();
    let mut ses = Vec::new();
    let mut rows = Vec::new();
    for n in 2..=plan.stages() {
        let alpha = plan.angles[n - 1];
        let r = plan.radii[n - 1];
        let a = Point::new(2.0 * r, 0.0);
        let d = plan.domain(n);
        let t_max = p.horizon_factor * (2.0 * r).powi(2);
        let cfg = ctx.sampler_for(2000 + n as u64, t_max, t_max / 10.0);
        rep.domain(format!("D{n}"), &d);
        rep.seed(format!("D{n}.ratio"), &cfg);
        let b = sample_batch(&d, a, &cfg, p.samples)?;
        let u0 = dynkin_wedge(alpha, a);
        let vals: Vec<f64> = b.samples.iter().map(|s| u0 - dynkin_wedge(alpha, s.position)).collect();
        let scale = 4.0 * r * r;
        let dyn_ci = mean_ci(&vals, p.level);
        let plain = mean_ci(&b.times()?, p.level);
        let (ratio, se) = (dyn_ci.mean / scale, dyn_ci.stderr / scale);
        let t2 = alpha.tan().powi(2);
        let bound = 3.0 * t2 / (16.0 * (1.0 - t2));
        rep.oracle(format!("stage{n}.ratio_bound"), bound);
        rep.metric(format!("stage{n}.ratio"), ratio);
        rep.metric(format!("stage{n}.ratio_stderr"), se);
        rep.metric(format!("stage{n}.ratio_plain"), plain.mean / scale);
        rep.metric(format!("stage{n}.ratio_plain_stderr"), plain.stderr / scale);
        rep.metric(format!("stage{n}.truncated"), b.truncated_count() as f64);
        rep.check(
            format!("stage {n}: ratio at least (3/16)tan²α/(1−tan²α)"),
            ratio + z * se >= bound,
            format!("{ratio:.5} ± {:.5} vs bound {bound:.5}", z * se),
        );
        rows.push(vec![n as f64, alpha, r, ratio, se, plain.mean / scale, bound]);
        ns.push(n as f64);
        ratios.push(ratio);
        ses.push(se);
    }
    rep.curve(
        "ratio",
        &["stage", "angle", "radius", "ratio", "stderr", "ratio_plain", "bound"],
        rows,
    );
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    rep.check("ratio increases across stages", increasing, format!("{ratios:?}"));
    if ns.len() >= 2 {
        let fit = ols(&ns, &ratios);
        // slope uncertainty propagated from the per-stage Monte Carlo errors
        let mean_n = ns.iter().sum::<f64>() / ns.len() as f64;
        let sxx: f64 = ns.iter().map(|n| (n - mean_n).powi(2)).sum();
        let slope_se = ns
            .iter()
            .zip(&ses)
            .map(|(n, s)| ((n - mean_n) / sxx * s).powi(2))
            .sum::<f64>()
            .sqrt();
        rep.metric("trend.slope", fit.slope);
        rep.metric("trend.slope_mc_stderr", slope_se);
        if fit.slope_se.is_finite() {
            rep.metric("trend.slope_residual_stderr", fit.slope_se);
        }
        rep.check(
            "fitted slope of ratio vs n positive, CI excluding 0",
            fit.slope - z * slope_se > 0.0,
            format!("{:.4} ± {:.4}", fit.slope, z * slope_se),
        );
    }

    // pure wedge: E_{(2R,0)}[T(W_n)]/(4R²) = tan²α/(1−tan²α) for every R
    let mut sub = 3000u64;
    for &s in &p.sanity_stages {
        let alpha = plan.angles[s - 1];
        let t2 = alpha.tan().powi(2);
        let exact = t2 / (1.0 - t2);
        let w = Domain::Wedge { half_angle: alpha };
        rep.oracle(format!("wedge{s}.ratio"), exact);
        let mut est = Vec::new();
        for &r in &p.sanity_radii {
            let (ci, tw) = p.split_mean(ctx, sub, &w, Point::new(2.0 * r, 0.0), p.sanity_horizon_factor * r * r)?;
            sub += 1;
            let scale = 4.0 * r * r;
            let (m, se) = (ci.mean / scale, ci.stderr / scale);
            rep.metric(format!("wedge{s}.R{r}.ratio"), m);
            rep.metric(format!("wedge{s}.R{r}.stderr"), se);
            rep.metric(format!("wedge{s}.R{r}.truncated_weight"), tw);
            rep.check(
                format!("wedge stage {s}, R = {r}: ratio matches tan²α/(1−tan²α)"),
                (m - exact).abs() <= z * se,
                format!("{m:.5} ± {:.5} vs {exact:.5}", z * se),
            );
            est.push((m, se));
        }
        for w2 in est.windows(2) {
            let slack = z * (w2[0].1.powi(2) + w2[1].1.powi(2)).sqrt();
            rep.check(
                format!("wedge stage {s}: ratio independent of R"),
                (w2[0].0 - w2[1].0).abs() <= slack,
                format!("{:.5} vs {:.5} (slack {slack:.5})", w2[0].0, w2[1].0),
            );
        }
    }

    // strong Markov at |z| = R: E_{2R}[T(W)] ≤ E_{2R}[T(W ∩ {|z| > R})] + E_R[T(W)]
    let s = p.decomposition_stage;
    let alpha = plan.angles[s - 1];
    let r = if s >= 2 { plan.radii[s - 1] } else { 1.0 };
    let w = Domain::Wedge { half_angle: alpha };
    let cut = Domain::Intersection {
        parts: vec![w.clone(), Domain::DiskComplement { radius: r }],
    };
    let h = p.sanity_horizon_factor * r * r;
    let (lhs, _) = p.split_mean(ctx, 4000, &w, Point::new(2.0 * r, 0.0), h)?;
    let (outer, _) = p.split_mean(ctx, 4001, &cut, Point::new(2.0 * r, 0.0), h)?;
    let (restart, _) = p.split_mean(ctx, 4002, &w, Point::new(r, 0.0), h)?;
    rep.domain("decomposition.cut", &cut);
    rep.metric("decomposition.lhs", lhs.mean);
    rep.metric("decomposition.outer", outer.mean);
    rep.metric("decomposition.restart", restart.mean);
    rep.oracle("decomposition.restart", wedge_mean(alpha, Point::new(r, 0.0))?);
    let slack = z * (lhs.stderr.powi(2) + outer.stderr.powi(2) + restart.stderr.powi(2)).sqrt();
    rep.check(
        format!("stage {s}: E_2R[T(W)] ≤ E_2R[T(W ∩ {{|z|>R}})] + E_R[T(W)]"),
        lhs.mean <= outer.mean + restart.mean + slack,
        format!("{:.4} ≤ {:.4} + {:.4} + {slack:.4}", lhs.mean, outer.mean, restart.mean),
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticalMomentParams {
    pub plan: PlanSource,
    pub samples: usize,
    pub level: f64,
    pub horizon_factor: f64,
    /// The D_N tail only settles for `t ≫ R_N²`, so the fit starts late.
    pub lower_quantile: Option<f64>,
    /// Allowed distance of the tail-index CI from `[π/(4α_N), 1]`.
    pub tail_slack: f64,
}

impl Default for CriticalMomentParams {
    fn default() -> Self {
        CriticalMomentParams {
            plan: PlanSource::default(),
            samples: 100_000,
            level: 0.99,
            horizon_factor: 1e8,
            lower_quantile: Some(0.99),
            tail_slack: 0.1,
        }
    }
}

impl Study for CriticalMomentParams {
    const NAME: &'static str = "critical-moment";

    fn validate(&self) -> Result<()> {
        self.plan.check()?;
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid("params.level", "must lie in (0, 1)"));
        }
        Ok(())
    }

    fn set_samples(&mut self, n: usize) {
        self.samples = n;
        if let PlanSource::Search(p) = &mut self.plan {
            p.set_samples(n);
        }
    }

    fn set_t_max(&mut self, t: f64) {
        self.horizon_factor = t;
    }

    fn run(&self, ctx: &StudyContext) -> Result<Report> {
        let mut rep = Report::new(Self::NAME, ctx, self);
        let plan = self.plan.resolve(ctx)?;
        report_plan(&mut rep, &plan);
        critical_moment_into(&mut rep, self, &plan, ctx)?;
        Ok(rep)
    }
}

pub(crate) fn critical_moment_into(
    rep: &mut Report,
    p: &CriticalMomentParams,
    plan: &StaircasePlan,
    ctx: &StudyContext,
) -> Result<()> {
    let z = z_value(p.level);
    let n = plan.stages();
    let alpha = plan.angles[n - 1];
    let d = plan.domain(n);
    let r = plan.radii[n - 1];
    let t_max = p.horizon_factor * r.max(1.0).powi(2);
    let cfg = ctx.sampler_for(5000, t_max, t_max / 10.0);
    rep.domain(format!("D{n}"), &d);
    rep.seed(format!("D{n}"), &cfg);
    let b = sample_batch(&d, START, &cfg, p.samples)?;
    let ci = mean_ci(&b.times()?, p.level);
    let c = plan.schedule.c;
    rep.metric("deepest.mean", ci.mean);
    rep.metric("deepest.stderr", ci.stderr);
    let dy = mean_ci(&dynkin_values(&b, alpha, START), p.level);
    rep.metric("deepest.dynkin_mean", dy.mean);
    rep.metric("deepest.dynkin_stderr", dy.stderr);
    rep.check(
        format!("D{n}: mean at most 2C"),
        ci.mean <= 2.0 * c + z * ci.stderr,
        format!("{:.5} ± {:.5} vs 2C = {:.5}", ci.mean, z * ci.stderr, 2.0 * c),
    );
    let target = PI / (4.0 * alpha);
    rep.oracle("deepest.bh", target);
    for (k, &a) in plan.angles.iter().enumerate() {
        rep.oracle(format!("stage{}.bh", k + 1), PI / (4.0 * a));
    }
    let e = tail_index(&b, TailMethod::LogLogLS, None, &ctx.estimator_with(p.lower_quantile))?;
    rep.tail("deepest.tail", &e);
    rep.check(
        format!("D{n}: tail-index CI within [π/(4α_N) − slack, 1 + slack]"),
        e.ci_low >= target - p.tail_slack && e.ci_high <= 1.0 + p.tail_slack,
        format!("[{:.4}, {:.4}] vs [{:.4}, {:.4}]", e.ci_low, e.ci_high, target - p.tail_slack, 1.0 + p.tail_slack),
    );
    rep.check(
        format!("D{n}: tail-index CI covers π/(4α_N)"),
        e.covers(target),
        format!("{:.4} [{:.4}, {:.4}] vs {target:.4}", e.exponent, e.ci_low, e.ci_high),
    );
    let trend = plan.angles.windows(2).all(|w| PI / (4.0 * w[1]) < PI / (4.0 * w[0]));
    rep.check(
        "π/(4α_n) decreases toward 1",
        trend && target > 1.0,
        format!("π/(4α_N) = {target:.5}"),
    );
    Ok(())
}
