//! C ABI over the `mtail` toolkit.
//!
//! Every fallible call returns an [`MtailStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and can
//! be read with [`mtail_last_error_message`]. Models and parameter sets are
//! opaque handles; release them with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mtail::bounds::{self, BernsteinParams, BoundConstant, TailEnvelope};
use mtail::martingales::MartingaleModel;
use mtail::montecarlo::{self, EstimateMethod, SimulationConfig};
use mtail::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtailStatus {
    Ok = 0,
    Domain = 1,
    InvalidParams = 2,
    InvalidModel = 3,
    UnsupportedModel = 4,
    Config = 5,
    Unavailable = 6,
    Io = 7,
    Parse = 8,
    NullPointer = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

impl From<&Error> for MtailStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => MtailStatus::Domain,
            Error::InvalidParams(_) => MtailStatus::InvalidParams,
            Error::InvalidModel(_) => MtailStatus::InvalidModel,
            Error::UnsupportedModel(_) => MtailStatus::UnsupportedModel,
            Error::Config(_) => MtailStatus::Config,
            Error::Unavailable(_) => MtailStatus::Unavailable,
            Error::Io(_) => MtailStatus::Io,
            Error::Parse(_) => MtailStatus::Parse,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MtailStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(MtailStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MtailStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtailStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MtailStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mtail_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mtail_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque Bernstein parameter pair `(ε, δ)`.
pub struct MtailParams(BernsteinParams);

/// Opaque martingale model.
pub struct MtailModel(MartingaleModel);

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mtail_params_new(epsilon: f64, delta: f64, out: *mut *mut MtailParams) -> MtailStatus {
    guard(|| {
        let p = BernsteinParams::new(epsilon, delta)?;
        write(out, Box::into_raw(Box::new(MtailParams(p))))
    })
}

/// # Safety
/// `params` must be null or a handle from `mtail_params_new` or
/// `mtail_model_params` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn mtail_params_free(params: *mut MtailParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn boxed_model(m: MartingaleModel) -> *mut MtailModel {
    Box::into_raw(Box::new(MtailModel(m)))
}

/// Builds a model from its JSON definition.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_model_from_json(json: *const c_char, out: *mut *mut MtailModel) -> MtailStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(MtailStatus::InvalidUtf8, e.to_string()))?;
        write(out, boxed_model(MartingaleModel::from_json(text)?))
    })
}

/// `n` independent Rademacher steps of size `n^{-1/2}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_model_rademacher(n: usize, out: *mut *mut MtailModel) -> MtailStatus {
    guard(|| write(out, boxed_model(MartingaleModel::equal_rademacher(n)?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_model_variance_switch(n: usize, delta: f64, out: *mut *mut MtailModel) -> MtailStatus {
    guard(|| write(out, boxed_model(MartingaleModel::variance_switch(n, delta)?)))
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mtail_model_free(model: *mut MtailModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_model_len(model: *const MtailModel, out: *mut usize) -> MtailStatus {
    guard(|| write(out, deref(model, "model")?.0.len()))
}

/// The `(ε, δ)` the model satisfies, as a new parameter handle.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_model_params(model: *const MtailModel, out: *mut *mut MtailParams) -> MtailStatus {
    guard(|| {
        let p = deref(model, "model")?.0.bernstein_params()?;
        write(out, Box::into_raw(Box::new(MtailParams(p))))
    })
}

/// Envelope value at one point. `xhat` and `lambda_bar` are NaN when the
/// envelope does not use them.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MtailEnvelope {
    pub x: f64,
    pub value: f64,
    pub log_value: f64,
    pub xhat: f64,
    pub lambda_bar: f64,
}

impl From<TailEnvelope> for MtailEnvelope {
    fn from(e: TailEnvelope) -> Self {
        Self {
            x: e.x,
            value: e.value,
            log_value: e.log_value,
            xhat: e.xhat.unwrap_or(f64::NAN),
            lambda_bar: e.lambda_bar.unwrap_or(f64::NAN),
        }
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_std_normal_sf(x: f64, out: *mut f64) -> MtailStatus {
    guard(|| write(out, mtail::gaussian::std_normal_sf(x)?))
}

/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_tail_bound_sq(x: f64, params: *const MtailParams, out: *mut MtailEnvelope) -> MtailStatus {
    guard(|| write(out, bounds::tail_bound_sq(x, &deref(params, "params")?.0)?.into()))
}

/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_strengthened_tail(
    x: f64,
    params: *const MtailParams,
    c: f64,
    out: *mut MtailEnvelope,
) -> MtailStatus {
    guard(|| {
        let c = BoundConstant::absolute(c)?;
        write(out, bounds::strengthened_tail_envelope(x, &deref(params, "params")?.0, &c)?.into())
    })
}

/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_nonuniform_be(
    x: f64,
    params: *const MtailParams,
    c: f64,
    out: *mut MtailEnvelope,
) -> MtailStatus {
    guard(|| {
        let c = BoundConstant::absolute(c)?;
        write(out, bounds::nonuniform_be_envelope(x, &deref(params, "params")?.0, &c)?.into())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_corollary(
    x: f64,
    epsilon: f64,
    qc_l1: f64,
    c: f64,
    out: *mut MtailEnvelope,
) -> MtailStatus {
    guard(|| {
        let c = BoundConstant::absolute(c)?;
        write(out, bounds::corollary_envelope(x, epsilon, qc_l1, &c)?.into())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtailMethod {
    PlainClopperPearson = 0,
    ImportanceSampled = 1,
    Exhaustive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MtailTailEstimate {
    pub x: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub std_error: f64,
    pub effective_samples: f64,
    pub tilt: f64,
    pub hits: u64,
    pub paths: u64,
    pub method: MtailMethod,
}

/// Estimates `P(Sₙ > x)`. `workers = 0` uses every core; results do not
/// depend on it. With `importance` set the default exponential tilt is used.
/// Small laws are enumerated exactly.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtail_estimate_tail(
    model: *const MtailModel,
    x: f64,
    paths: u64,
    seed: u64,
    workers: usize,
    importance: bool,
    out: *mut MtailTailEstimate,
) -> MtailStatus {
    guard(|| {
        let m = deref(model, "model")?.0.clone();
        let cfg = SimulationConfig::new(m, paths, seed).with_workers(workers);
        cfg.validate()?;
        let e = if importance {
            montecarlo::estimate_tail_is(&cfg, x, None)?
        } else {
            montecarlo::estimate_tail_plain(&cfg, x)?
        };
        write(
            out,
            MtailTailEstimate {
                x: e.x,
                p_hat: e.p_hat,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
                std_error: e.std_error,
                effective_samples: e.effective_samples,
                tilt: e.tilt,
                hits: e.hits,
                paths: e.paths,
                method: match e.method {
                    EstimateMethod::PlainClopperPearson => MtailMethod::PlainClopperPearson,
                    EstimateMethod::ImportanceSampledDelta => MtailMethod::ImportanceSampled,
                    EstimateMethod::Exhaustive => MtailMethod::Exhaustive,
                },
            },
        )
    })
}
