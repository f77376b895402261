//! Moment, survival, tail-index and layer-decay estimates from sample batches.
//!
//! Truncated samples are never dropped: they enter moments as `t_max^p` and
//! survival curves as `T > t_max`. Bootstrap intervals draw from an auxiliary
//! stream keyed by the batch seed, so every estimate is reproducible.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::aux_stream;
use crate::sampler::{LayerTrace, SampleBatch};
use crate::stats::{binomial_ci, ks_one_sample, ols, quantile_sorted, sort_floats};

const TAG_LOGLOG: u64 = 0x11;
const TAG_HILL: u64 = 0x12;
const TAG_DECAY: u64 = 0x13;
const TAG_DECAY_SPLIT: u64 = 0x14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Flag a moment as divergent when truncated samples carry more than this share of it.
    pub divergence_threshold: f64,
    pub bootstrap_resamples: usize,
    pub ci_level: f64,
    /// Default window lower end: this quantile of the untruncated times.
    pub lower_quantile: f64,
    /// Default window upper end as a fraction of `t_max`.
    pub upper_fraction: f64,
    /// Samples required strictly inside the fit window.
    pub min_window_samples: usize,
    /// Log-spaced survival points used by the log-log fit.
    pub grid_points: usize,
    /// The log-log fit stops where fewer than this many samples survive.
    pub min_tail_count: usize,
    /// Layer depths with fewer traces than this are left out of the decay fit.
    pub min_layer_count: usize,
    /// Bootstrap seed for layer traces (batches use their own seed).
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            divergence_threshold: 0.2,
            bootstrap_resamples: 200,
            ci_level: 0.95,
            lower_quantile: 0.8,
            upper_fraction: 0.25,
            min_window_samples: 50,
            grid_points: 20,
            min_tail_count: 20,
            min_layer_count: 30,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.divergence_threshold > 0.0 && self.divergence_threshold < 1.0) {
            return bad("divergence_threshold must lie in (0, 1)");
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad("ci_level must lie in (0, 1)");
        }
        if !(self.lower_quantile >= 0.0 && self.lower_quantile < 1.0) {
            return bad("lower_quantile must lie in [0, 1)");
        }
        if !(self.upper_fraction > 0.0 && self.upper_fraction < 0.5) {
            return bad("upper_fraction must lie in (0, 1/2)");
        }
        if self.grid_points < 3 || self.bootstrap_resamples < 10 {
            return bad("need at least 3 grid points and 10 bootstrap resamples");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub t_max: f64,
    pub value: f64,
    pub stderr: f64,
    pub truncation_share: f64,
    pub divergence_flag: bool,
    pub n: usize,
    pub truncated: usize,
}

/// `E[min(T, t)^p]` with `t = t_max` or a smaller re-truncation horizon.
pub fn truncated_moment(batch: &SampleBatch, p: f64, t_max: Option<f64>, cfg: &EstimatorConfig) -> Result<MomentEstimate> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("moment order must be positive, got {p}")));
    }
    let t = t_max.unwrap_or(batch.config.t_max);
    if !(t > 0.0 && t <= batch.config.t_max) {
        return Err(Error::InvalidArgument(format!(
            "re-truncation horizon {t} must lie in (0, {}]",
            batch.config.t_max
        )));
    }
    let tp = t.powf(p);
    let mut n_trunc = 0usize;
    let vals: Vec<f64> = batch
        .samples
        .iter()
        .map(|s| {
            let time = s.time.ok_or(Error::TimeUnavailable)?;
            if s.truncated || time >= t {
                n_trunc += 1;
                Ok(tp)
            } else {
                Ok(time.powf(p))
            }
        })
        .collect::<Result<_>>()?;
    let n = vals.len();
    let value = vals.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let ss: f64 = vals.iter().map(|v| (v - value).powi(2)).sum();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    let truncation_share = if value > 0.0 {
        (n_trunc as f64 * tp / n as f64 / value).min(1.0)
    } else {
        0.0
    };
    Ok(MomentEstimate {
        p,
        t_max: t,
        value,
        stderr,
        truncation_share,
        divergence_flag: truncation_share > cfg.divergence_threshold,
        n,
        truncated: n_trunc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub t: f64,
    pub survival: f64,
    pub lo: f64,
    pub hi: f64,
    pub at_risk: usize,
}

/// Empirical `P(T > t)` on `grid` with Clopper–Pearson intervals.
pub fn survival_curve(batch: &SampleBatch, grid: &[f64], level: f64) -> Result<Vec<SurvivalPoint>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let t_max = batch.config.t_max;
    if let Some(t) = grid.iter().find(|&&t| !(t > 0.0 && t <= t_max)) {
        return Err(Error::InvalidArgument(format!("grid point {t} outside (0, {t_max}]")));
    }
    let mut exits = Vec::with_capacity(batch.len());
    for s in &batch.samples {
        let time = s.time.ok_or(Error::TimeUnavailable)?;
        if !s.truncated {
            exits.push(time);
        }
    }
    sort_floats(&mut exits);
    let n = batch.len();
    Ok(grid
        .iter()
        .map(|&t| {
            let done = exits.partition_point(|&x| x <= t);
            let k = n - done;
            let (lo, hi) = binomial_ci(k, n, level);
            SurvivalPoint {
                t,
                survival: k as f64 / n as f64,
                lo,
                hi,
                at_risk: k,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMethod {
    /// Least squares on `(log t, log P̂(T > t))`.
    LogLogLS,
    /// Hill-type maximum likelihood for a Pareto tail above `t₁`, censored at `t₂`.
    Hill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub exponent: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fit_window: (f64, f64),
    pub method: TailMethod,
    /// R² of the log-log fit, or the KS distance of the Hill fit.
    pub gof: f64,
    pub n_window: usize,
    pub n_total: usize,
}

impl TailEstimate {
    pub fn covers(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Times of a batch with truncated samples mapped to `+∞`, sorted.
fn sorted_times(batch: &SampleBatch) -> Result<Vec<f64>> {
    let mut v = batch
        .samples
        .iter()
        .map(|s| match (s.truncated, s.time) {
            (_, None) => Err(Error::TimeUnavailable),
            (true, _) => Ok(f64::INFINITY),
            (false, Some(t)) => Ok(t),
        })
        .collect::<Result<Vec<_>>>()?;
    sort_floats(&mut v);
    Ok(v)
}

fn survivors(sorted: &[f64], t: f64) -> usize {
    sorted.len() - sorted.partition_point(|&x| x <= t)
}

/// Fits the survival tail exponent of `T` over `window` (default: the
/// configured quantile of untruncated times up to `upper_fraction·t_max`).
pub fn tail_index(
    batch: &SampleBatch,
    method: TailMethod,
    window: Option<(f64, f64)>,
    cfg: &EstimatorConfig,
) -> Result<TailEstimate> {
    cfg.validate()?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let t_max = batch.config.t_max;
    let xs = sorted_times(batch)?;
    let n = xs.len();
    let (t1, t2) = match window {
        Some((a, b)) => {
            if !(a > 0.0 && a < b && b <= t_max) {
                return Err(Error::InvalidArgument(format!("window ({a}, {b}) must satisfy 0 < t1 < t2 <= {t_max}")));
            }
            (a, b)
        }
        None => {
            let exited = xs.partition_point(|x| x.is_finite());
            if exited == 0 {
                return Err(Error::WindowTooSparse {
                    t1: 0.0,
                    t2: cfg.upper_fraction * t_max,
                    count: 0,
                    needed: cfg.min_window_samples,
                });
            }
            (quantile_sorted(&xs[..exited], cfg.lower_quantile), cfg.upper_fraction * t_max)
        }
    };
    if t2 >= t_max / 2.0 {
        return Err(Error::TruncationContamination { t2, half: t_max / 2.0 });
    }
    let sparse = |t2: f64, count: usize| Error::WindowTooSparse {
        t1,
        t2,
        count,
        needed: cfg.min_window_samples,
    };
    if t1 >= t2 {
        return Err(sparse(t2, 0));
    }
    let mut rng = aux_stream(batch.config.seed, if method == TailMethod::Hill { TAG_HILL } else { TAG_LOGLOG });
    match method {
        TailMethod::LogLogLS => {
            // stop where the survivor count gets too small to take a logarithm of
            let k = cfg.min_tail_count.max(1);
            let t2 = if n > k { t2.min(xs[n - k - 1]) } else { t1 };
            let count = survivors(&xs, t1) - survivors(&xs, t2);
            if t2 <= t1 || count < cfg.min_window_samples {
                return Err(sparse(t2, count));
            }
            loglog_fit(&xs, t1, t2, cfg, &mut rng)
        }
        TailMethod::Hill => {
            let count = survivors(&xs, t1) - survivors(&xs, t2);
            if count < cfg.min_window_samples {
                return Err(sparse(t2, count));
            }
            hill_fit(&xs, t1, t2, cfg, &mut rng)
        }
    }
}

fn log_grid(t1: f64, t2: f64, k: usize) -> Vec<f64> {
    let (a, b) = (t1.ln(), t2.ln());
    (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect()
}

/// Slope of `ln S` against `ln t` from per-point survivor counts.
fn loglog_slope(lt: &[f64], surv: &[usize], n: usize) -> Option<(f64, f64)> {
    let (x, y): (Vec<f64>, Vec<f64>) = lt
        .iter()
        .zip(surv)
        .filter(|(_, &s)| s > 0)
        .map(|(&x, &s)| (x, (s as f64 / n as f64).ln()))
        .unzip();
    if x.len() < 3 {
        return None;
    }
    let f = ols(&x, &y);
    Some((-f.slope, f.r2))
}

fn loglog_fit(xs: &[f64], t1: f64, t2: f64, cfg: &EstimatorConfig, rng: &mut ChaCha8Rng) -> Result<TailEstimate> {
    let n = xs.len();
    let grid = log_grid(t1, t2, cfg.grid_points);
    let lt: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    let surv: Vec<usize> = grid.iter().map(|&t| survivors(xs, t)).collect();
    let (exponent, r2) = loglog_slope(&lt, &surv, n).ok_or(Error::WindowTooSparse {
        t1,
        t2,
        count: 0,
        needed: cfg.min_window_samples,
    })?;
    // bin counts between consecutive grid points; the last bin is everything beyond t_K
    let k = grid.len();
    let mut bins = vec![0u64; k + 1];
    bins[0] = (n - surv[0]) as u64;
    for i in 1..k {
        bins[i] = (surv[i - 1] - surv[i]) as u64;
    }
    bins[k] = surv[k - 1] as u64;
    let mut reps = Vec::with_capacity(cfg.bootstrap_resamples);
    let mut draw = vec![0u64; k + 1];
    for _ in 0..cfg.bootstrap_resamples {
        multinomial(n as u64, &bins, &mut draw, rng);
        let mut s = vec![0usize; k];
        let mut acc = draw[k];
        for i in (0..k).rev() {
            s[i] = acc as usize;
            acc += draw[i];
        }
        if let Some((e, _)) = loglog_slope(&lt, &s, n) {
            reps.push(e);
        }
    }
    let n_window = surv[0] - surv[k - 1];
    Ok(finish(exponent, reps, (t1, t2), TailMethod::LogLogLS, r2, n_window, n, cfg))
}

/// Multinomial draw over categories with weights `counts / total` by sequential binomials.
fn multinomial(total: u64, counts: &[u64], out: &mut [u64], rng: &mut ChaCha8Rng) {
    let mut left = total;
    let mut mass: u64 = counts.iter().sum();
    for (o, &c) in out.iter_mut().zip(counts) {
        if left == 0 || mass == 0 {
            *o = 0;
            continue;
        }
        let p = (c as f64 / mass as f64).min(1.0);
        *o = if p >= 1.0 {
            left
        } else {
            Binomial::new(left, p).expect("valid binomial").sample(rng)
        };
        left -= *o;
        mass -= c;
    }
}

fn hill_fit(xs: &[f64], t1: f64, t2: f64, cfg: &EstimatorConfig, rng: &mut ChaCha8Rng) -> Result<TailEstimate> {
    let n = xs.len();
    let start = xs.partition_point(|&x| x <= t1);
    let exceed = &xs[start..];
    // (log excess capped at t2, uncensored?)
    let obs: Vec<(f64, bool)> = exceed.iter().map(|&x| ((x.min(t2) / t1).ln(), x <= t2)).collect();
    let mle = |o: &mut dyn Iterator<Item = (f64, bool)>| {
        let (mut d, mut s) = (0usize, 0.0);
        for (y, unc) in o {
            s += y;
            d += unc as usize;
        }
        if s > 0.0 && d > 0 {
            Some(d as f64 / s)
        } else {
            None
        }
    };
    let gamma = mle(&mut obs.iter().copied()).ok_or(Error::WindowTooSparse {
        t1,
        t2,
        count: 0,
        needed: cfg.min_window_samples,
    })?;
    // KS distance of the uncensored exceedances against the fitted censored Pareto
    let unc: Vec<f64> = exceed.iter().copied().filter(|&x| x <= t2).collect();
    let cdf = |x: f64| 1.0 - (x / t1).powf(-gamma);
    let gof = ks_one_sample(&unc, |x| cdf(x) / cdf(t2));
    let mut reps = Vec::with_capacity(cfg.bootstrap_resamples);
    let p = obs.len() as f64 / n as f64;
    for _ in 0..cfg.bootstrap_resamples {
        let m = Binomial::new(n as u64, p).expect("valid binomial").sample(rng) as usize;
        let mut it = (0..m).map(|_| obs[rng.random_range(0..obs.len())]);
        if let Some(g) = mle(&mut it) {
            reps.push(g);
        }
    }
    Ok(finish(gamma, reps, (t1, t2), TailMethod::Hill, gof, unc.len(), n, cfg))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    exponent: f64,
    mut reps: Vec<f64>,
    fit_window: (f64, f64),
    method: TailMethod,
    gof: f64,
    n_window: usize,
    n_total: usize,
    cfg: &EstimatorConfig,
) -> TailEstimate {
    sort_floats(&mut reps);
    let a = (1.0 - cfg.ci_level) / 2.0;
    let (lo, hi) = if reps.is_empty() {
        (exponent, exponent)
    } else {
        (quantile_sorted(&reps, a), quantile_sorted(&reps, 1.0 - a))
    };
    TailEstimate {
        exponent,
        ci_low: lo.min(exponent),
        ci_high: hi.max(exponent),
        fit_window,
        method,
        gof,
        n_window,
        n_total,
    }
}

/// Local tail exponent over one window of a rolling fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSlope {
    pub t1: f64,
    pub t2: f64,
    pub exponent: f64,
}

/// Log-log tail exponents over `windows` log-equal windows between the median
/// time and the time beyond which fewer than `min_survivors` samples remain.
pub fn rolling_tail_slopes(batch: &SampleBatch, windows: usize, min_survivors: usize) -> Result<Vec<WindowSlope>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let xs = sorted_times(batch)?;
    let n = xs.len();
    if windows == 0 || n <= min_survivors || !xs[n / 2].is_finite() {
        return Err(Error::WindowTooSparse {
            t1: xs[n / 2],
            t2: f64::NAN,
            count: n,
            needed: min_survivors,
        });
    }
    let lo = xs[n / 2].ln();
    let end = xs[n - min_survivors - 1].min(batch.config.t_max);
    let hi = end.ln();
    if !(hi > lo) {
        return Err(Error::WindowTooSparse {
            t1: xs[n / 2],
            t2: end,
            count: n / 2,
            needed: min_survivors,
        });
    }
    let step = (hi - lo) / windows as f64;
    (0..windows)
        .map(|w| {
            let (a, b) = ((lo + step * w as f64).exp(), (lo + step * (w + 1) as f64).exp());
            let grid = log_grid(a, b, 8);
            let lt: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
            let s: Vec<usize> = grid.iter().map(|&t| survivors(&xs, t)).collect();
            let (exponent, _) = loglog_slope(&lt, &s, n).ok_or(Error::WindowTooSparse {
                t1: a,
                t2: b,
                count: s[0],
                needed: min_survivors,
            })?;
            Ok(WindowSlope { t1: a, t2: b, exponent })
        })
        .collect()
}

/// Exponent increase per decade of `t` between the first and last windows,
/// and whether the exponents increase window over window.
pub fn slope_growth_per_decade(slopes: &[WindowSlope]) -> (f64, bool) {
    let center = |w: &WindowSlope| (w.t1 * w.t2).sqrt().log10();
    let (f, l) = (&slopes[0], &slopes[slopes.len() - 1]);
    let rate = (l.exponent - f.exponent) / (center(l) - center(f));
    let monotone = slopes.windows(2).all(|w| w[1].exponent > w[0].exponent);
    (rate, monotone)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted per-layer survival ratio.
    pub alpha_hat: f64,
    pub c: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Layer depths `j` used in the fit.
    pub layers: Vec<usize>,
    /// Survivors at each used `j`: traces with at least `j` layers, or the
    /// stage count under splitting.
    pub counts: Vec<usize>,
}

/// Fits `P̂(layers ≥ j) ≈ c·α̂^j` over the depths with enough traces.
pub fn layer_decay_fit(traces: &[LayerTrace], cfg: &EstimatorConfig) -> Result<DecayFit> {
    let n = traces.len();
    let max = traces.iter().map(|t| t.layers_completed).max().unwrap_or(0);
    let mut hist = vec![0u64; max + 1];
    for t in traces {
        hist[t.layers_completed] += 1;
    }
    let at_least = |h: &[u64], j: usize| h[j.min(h.len())..].iter().sum::<u64>() as usize;
    let layers: Vec<usize> = (1..=max)
        .take_while(|&j| at_least(&hist, j) >= cfg.min_layer_count)
        .collect();
    if layers.len() < 3 {
        return Err(Error::InsufficientLayers { usable: layers.len() });
    }
    let xs: Vec<f64> = layers.iter().map(|&j| j as f64).collect();
    let fit_of = |h: &[u64]| {
        let ys: Option<Vec<f64>> = layers
            .iter()
            .map(|&j| {
                let c = at_least(h, j);
                (c > 0).then(|| (c as f64 / n as f64).ln())
            })
            .collect();
        ys.map(|ys| ols(&xs, &ys))
    };
    let f = fit_of(&hist).expect("usable layers have positive counts");
    let mut rng = aux_stream(cfg.seed, TAG_DECAY);
    let mut reps = Vec::with_capacity(cfg.bootstrap_resamples);
    let mut draw = vec![0u64; hist.len()];
    for _ in 0..cfg.bootstrap_resamples {
        multinomial(n as u64, &hist, &mut draw, &mut rng);
        if let Some(g) = fit_of(&draw) {
            reps.push(g.slope.exp());
        }
    }
    sort_floats(&mut reps);
    let a = (1.0 - cfg.ci_level) / 2.0;
    let alpha_hat = f.slope.exp();
    Ok(DecayFit {
        alpha_hat,
        c: f.intercept.exp(),
        residual: f.rms_residual,
        ci_low: quantile_sorted(&reps, a).min(alpha_hat),
        ci_high: quantile_sorted(&reps, 1.0 - a).max(alpha_hat),
        counts: layers.iter().map(|&j| at_least(&hist, j)).collect(),
        layers,
    })
}

/// Fits `P̂(layers ≥ j) = Π_{i ≤ j} counts_i / n` to `c·α̂^j`, for per-stage
/// survivor counts from [`crate::sampler::layered_splitting`] with `n` paths per
/// stage. Depths are used while the stage count reaches `min_layer_count`; the
/// CI comes from a parametric bootstrap redrawing each stage as a binomial.
pub fn layer_decay_split(counts: &[usize], n: usize, cfg: &EstimatorConfig) -> Result<DecayFit> {
    let used = counts.iter().take_while(|&&c| c >= cfg.min_layer_count).count();
    if used < 3 {
        return Err(Error::InsufficientLayers { usable: used });
    }
    let layers: Vec<usize> = (1..=used).collect();
    let xs: Vec<f64> = layers.iter().map(|&j| j as f64).collect();
    let fit_of = |c: &[u64]| {
        let mut acc = 0.0;
        let mut ys = Vec::with_capacity(used);
        for &k in &c[..used] {
            if k == 0 {
                return None;
            }
            acc += (k as f64 / n as f64).ln();
            ys.push(acc);
        }
        Some(ols(&xs, &ys))
    };
    let obs: Vec<u64> = counts[..used].iter().map(|&c| c as u64).collect();
    let f = fit_of(&obs).expect("used stages have survivors");
    let mut rng = aux_stream(cfg.seed, TAG_DECAY_SPLIT);
    let mut reps = Vec::with_capacity(cfg.bootstrap_resamples);
    let mut draw = vec![0u64; used];
    for _ in 0..cfg.bootstrap_resamples {
        for (d, &c) in draw.iter_mut().zip(&obs) {
            *d = Binomial::new(n as u64, c as f64 / n as f64).expect("valid binomial").sample(&mut rng);
        }
        if let Some(g) = fit_of(&draw) {
            reps.push(g.slope.exp());
        }
    }
    sort_floats(&mut reps);
    let a = (1.0 - cfg.ci_level) / 2.0;
    let alpha_hat = f.slope.exp();
    Ok(DecayFit {
        alpha_hat,
        c: f.intercept.exp(),
        residual: f.rms_residual,
        ci_low: quantile_sorted(&reps, a).min(alpha_hat),
        ci_high: quantile_sorted(&reps, 1.0 - a).max(alpha_hat),
        counts: counts[..used].to_vec(),
        layers,
    })
}

/// Both sides of the layer-increment bound `Σ_j E[(τ̃_j − τ̃_{j−1})^p] ≥ E[τ̃_k^p]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiCheck {
    pub p: f64,
    pub k: usize,
    pub increments: f64,
    pub total: f64,
    pub holds: bool,
}

/// `τ̃_j` of a trace: the j-th layer time, or the terminal time once the path is gone.
fn layer_time(t: &LayerTrace, j: usize) -> f64 {
    if j == 0 {
        0.0
    } else {
        t.layer_times[(j - 1).min(t.layer_times.len() - 1)]
    }
}

pub fn minkowski_layer_check(traces: &[LayerTrace], p: f64, k: usize) -> Result<MinkowskiCheck> {
    if traces.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !(p > 0.0 && p <= 1.0) || k == 0 {
        return Err(Error::InvalidArgument(format!("need 0 < p <= 1 and k >= 1, got p={p}, k={k}")));
    }
    let n = traces.len() as f64;
    let increments: f64 = (1..=k)
        .map(|j| {
            traces
                .iter()
                .map(|t| (layer_time(t, j) - layer_time(t, j - 1)).max(0.0).powf(p))
                .sum::<f64>()
                / n
        })
        .sum();
    let total = traces.iter().map(|t| layer_time(t, k).powf(p)).sum::<f64>() / n;
    Ok(MinkowskiCheck {
        p,
        k,
        increments,
        total,
        holds: increments >= total,
    })
}

#[cfg(test)]
mod tests;
