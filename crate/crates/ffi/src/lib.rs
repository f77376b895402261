//! C ABI over `bhlab`.
//!
//! Every function returns a [`BhStatus`]; on failure the message is available
//! from [`bh_last_error_message`] on the same thread until the next call.
//! Objects are opaque handles released with their `_free` function. Strings
//! returned through out-pointers are released with [`bh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bhlab::estimators::{tail_index, EstimatorConfig, TailMethod};
use bhlab::experiments::{run_experiment, Overrides, StudyContext};
use bhlab::geometry::{Domain, Point};
use bhlab::sampler::{sample_batch, SampleBatch, SamplerConfig};
use bhlab::{oracles, Error};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidDomain = 4,
    PointOutsideDomain = 5,
    InvalidArgument = 6,
    InvalidConfig = 7,
    /// The walk hit its step budget or the origin exclusion.
    SamplerFailure = 8,
    /// Not enough data for the requested estimate.
    EstimatorFailure = 9,
    MeanInfinite = 10,
    UnknownExperiment = 11,
    BufferTooSmall = 12,
    Io = 13,
    Panic = 14,
    Other = 15,
}

/// Opaque domain handle.
pub struct BhDomain(Domain);

/// Opaque batch of exit samples.
pub struct BhBatch(SampleBatch);

/// Tail-index fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BhTail {
    pub exponent: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub window_low: f64,
    pub window_high: f64,
    pub n_window: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(BhStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidDomain(_) => BhStatus::InvalidDomain,
            Error::PointOutsideDomain { .. } | Error::NotNearBoundary { .. } => BhStatus::PointOutsideDomain,
            Error::StepBudgetExceeded(_) | Error::OriginTooClose => BhStatus::SamplerFailure,
            Error::InvalidSamplerConfig(_) | Error::InvalidLayerSpec(_) | Error::ConfigInvalid { .. } => {
                BhStatus::InvalidConfig
            }
            Error::EmptyBatch
            | Error::TimeUnavailable
            | Error::WindowTooSparse { .. }
            | Error::TruncationContamination { .. }
            | Error::InsufficientLayers { .. }
            | Error::Inconclusive(_)
            | Error::QuadratureFailure { .. } => BhStatus::EstimatorFailure,
            Error::MeanInfinite(_) => BhStatus::MeanInfinite,
            Error::InvalidArgument(_) => BhStatus::InvalidArgument,
            Error::ExperimentUnknown { .. } => BhStatus::UnknownExperiment,
            Error::Io(_) => BhStatus::Io,
            _ => BhStatus::Other,
        };
        Fail(code, e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail(BhStatus::InvalidJson, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BhStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            BhStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BhStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(BhStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn opt_json<T: serde::de::DeserializeOwned + Default>(p: *const c_char, what: &str) -> Result<T, Fail> {
    if p.is_null() {
        return Ok(T::default());
    }
    Ok(serde_json::from_str(str_arg(p, what)?)?)
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail(BhStatus::Other, e.to_string()))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn bh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn bh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a domain from JSON, e.g. `{"kind":"wedge","half_angle":0.5}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_domain` writable.
#[no_mangle]
pub unsafe extern "C" fn bh_domain_from_json(json: *const c_char, out_domain: *mut *mut BhDomain) -> BhStatus {
    guard(|| {
        let slot = out(out_domain, "out_domain")?;
        *slot = ptr::null_mut();
        let d: Domain = serde_json::from_str(str_arg(json, "json")?)?;
        d.validate()?;
        *slot = Box::into_raw(Box::new(BhDomain(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from [`bh_domain_from_json`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn bh_domain_free(d: *mut BhDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `inside` writable.
#[no_mangle]
pub unsafe extern "C" fn bh_domain_contains(d: *const BhDomain, x: f64, y: f64, inside: *mut bool) -> BhStatus {
    guard(|| {
        let d = handle(d, "domain")?;
        *out(inside, "inside")? = d.0.contains(Point::new(x, y));
        Ok(())
    })
}

/// Distance from an interior point to the boundary.
///
/// # Safety
/// `d` must be a live handle and `dist` writable.
#[no_mangle]
pub unsafe extern "C" fn bh_domain_distance(d: *const BhDomain, x: f64, y: f64, dist: *mut f64) -> BhStatus {
    guard(|| {
        let d = handle(d, "domain")?;
        *out(dist, "dist")? = d.0.dist_to_boundary(Point::new(x, y))?;
        Ok(())
    })
}

/// Samples `n` exit times from `(x, y)`. `sampler_json` may be null for the
/// default sampler settings; otherwise it is a partial sampler config.
///
/// # Safety
/// `d` must be a live handle, `sampler_json` null or NUL-terminated, and
/// `out_batch` writable.
#[no_mangle]
pub unsafe extern "C" fn bh_sample_batch(
    d: *const BhDomain,
    x: f64,
    y: f64,
    sampler_json: *const c_char,
    n: usize,
    out_batch: *mut *mut BhBatch,
) -> BhStatus {
    guard(|| {
        let slot = out(out_batch, "out_batch")?;
        *slot = ptr::null_mut();
        let d = handle(d, "domain")?;
        let cfg: SamplerConfig = opt_json(sampler_json, "sampler_json")?;
        let b = sample_batch(&d.0, Point::new(x, y), &cfg, n)?;
        *slot = Box::into_raw(Box::new(BhBatch(b)));
        Ok(())
    })
}

/// # Safety
/// `b` must come from [`bh_sample_batch`] and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn bh_batch_free(b: *mut BhBatch) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// # Safety
/// `b` must be a live handle and both out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn bh_batch_counts(b: *const BhBatch, len: *mut usize, truncated: *mut usize) -> BhStatus {
    guard(|| {
        let b = handle(b, "batch")?;
        *out(len, "len")? = b.0.len();
        *out(truncated, "truncated")? = b.0.truncated_count();
        Ok(())
    })
}

/// Copies the exit times into `buf`; truncated samples hold the horizon.
/// `written` receives the batch length, also when `cap` is too small.
///
/// # Safety
/// `buf` must have room for `cap` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bh_batch_times(b: *const BhBatch, buf: *mut f64, cap: usize, written: *mut usize) -> BhStatus {
    guard(|| {
        let b = handle(b, "batch")?;
        let n = out(written, "written")?;
        let times = b.0.times()?;
        *n = times.len();
        if cap < times.len() {
            return Err(Fail(
                BhStatus::BufferTooSmall,
                format!("buffer holds {cap}, batch has {}", times.len()),
            ));
        }
        if !times.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            std::slice::from_raw_parts_mut(buf, times.len()).copy_from_slice(&times);
        }
        Ok(())
    })
}

/// Log-log tail-index fit over the default window. A NaN `lower_quantile`
/// keeps the default.
///
/// # Safety
/// `b` must be a live handle and `tail` writable.
#[no_mangle]
pub unsafe extern "C" fn bh_batch_tail_index(b: *const BhBatch, lower_quantile: f64, tail: *mut BhTail) -> BhStatus {
    guard(|| {
        let b = handle(b, "batch")?;
        let slot = out(tail, "tail")?;
        let mut cfg = EstimatorConfig::default();
        if !lower_quantile.is_nan() {
            cfg.lower_quantile = lower_quantile;
        }
        let e = tail_index(&b.0, TailMethod::LogLogLS, None, &cfg)?;
        *slot = BhTail {
            exponent: e.exponent,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            window_low: e.fit_window.0,
            window_high: e.fit_window.1,
            n_window: e.n_window,
        };
        Ok(())
    })
}

/// Closed-form mean exit time of the wedge `|arg z| < alpha` from `(x, y)`.
///
/// # Safety
/// `mean` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bh_wedge_mean(alpha: f64, x: f64, y: f64, mean: *mut f64) -> BhStatus {
    guard(|| {
        *out(mean, "mean")? = oracles::wedge_mean(alpha, Point::new(x, y))?;
        Ok(())
    })
}

/// Runs experiment `name` and returns its report as JSON in `out_json`.
/// `params_json` may be null for the defaults. A `samples` of 0 keeps the
/// configured sample count.
///
/// # Safety
/// `name` must be NUL-terminated, `params_json` null or NUL-terminated, and
/// `out_json` writable. Release the result with [`bh_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bh_run_experiment(
    name: *const c_char,
    params_json: *const c_char,
    seed: u64,
    samples: usize,
    out_json: *mut *mut c_char,
) -> BhStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        let name = str_arg(name, "name")?;
        let params: serde_json::Value = opt_json(params_json, "params_json")?;
        let ov = Overrides {
            samples: (samples > 0).then_some(samples),
            t_max: None,
        };
        let rep = run_experiment(name, params, &ov, &StudyContext::new(seed))?;
        *slot = c_string(serde_json::to_string(&rep)?)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed already.
#[no_mangle]
pub unsafe extern "C" fn bh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
