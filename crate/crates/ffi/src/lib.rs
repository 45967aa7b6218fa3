//! C ABI over `timing_inference`.
//!
//! Every fallible function returns a [`TiStatus`]; on failure the message is
//! available from [`ti_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings returned
//! through `char **` are owned by the caller and released with
//! [`ti_string_free`].
//!
//! Panics never cross the boundary; they surface as `TI_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde::Deserialize;
use timing_inference::conditions::{generate_condition, ConditionSpec, GeneratorConfig};
use timing_inference::fitting::{fit, ConditionRatings, ConditionSet, GridSpec};
use timing_inference::inference::ModelConfig;
use timing_inference::optimizer::{optimize, OptimizeConstraints, SearchMode};
use timing_inference::trajectory::{Path, TimedTrajectory};
use timing_inference::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullOrEncoding = 1,
    /// Malformed or invalid input (bad JSON, wrong dimensions, infeasible constraints).
    InvalidInput = 2,
    /// The computation itself failed (undefined correlation, non-finite values).
    Domain = 3,
    /// Output buffer too small.
    BufferTooSmall = 4,
    /// Internal panic; the library state is still usable.
    Panic = 5,
}

/// Opaque timed trajectory.
pub struct TiTrajectory(TimedTrajectory);

/// Opaque model configuration (model, hidden-state support, likelihood mode).
pub struct TiModel(ModelConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: TiStatus, msg: impl Into<String>) -> TiStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> TiStatus {
    let status = if e.is_domain() {
        TiStatus::Domain
    } else {
        TiStatus::InvalidInput
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TiStatus>) -> TiStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TiStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TiStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, TiStatus> {
    if p.is_null() {
        return Err(fail(TiStatus::NullOrEncoding, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TiStatus::NullOrEncoding, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, TiStatus> {
    p.as_ref()
        .ok_or_else(|| fail(TiStatus::NullOrEncoding, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), TiStatus> {
    if out.is_null() {
        return Err(fail(TiStatus::NullOrEncoding, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), TiStatus> {
    let c = CString::new(s).map_err(|_| fail(TiStatus::InvalidInput, "output contains a nul byte"))?;
    write_out(out, c.into_raw(), "output pointer")
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, TiStatus> {
    serde_json::from_str(text).map_err(|e| fail(TiStatus::InvalidInput, format!("{what}: {e}")))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ti_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ti_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ti_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `{"waypoints": [[..]..], "stamps": [..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_trajectory_from_json(json: *const c_char, out: *mut *mut TiTrajectory) -> TiStatus {
    guard(|| {
        let traj: TimedTrajectory = parse(str_arg(json, "json")?, "trajectory")?;
        write_out(out, Box::into_raw(Box::new(TiTrajectory(traj))), "out")
    })
}

/// Serializes a trajectory to JSON.
///
/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_trajectory_to_json(traj: *const TiTrajectory, out: *mut *mut c_char) -> TiStatus {
    guard(|| {
        let t = ref_arg(traj, "traj")?;
        let s = serde_json::to_string(&t.0).map_err(|e| fail(TiStatus::InvalidInput, e.to_string()))?;
        write_string(out, s)
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ti_trajectory_free(traj: *mut TiTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_trajectory_total_duration(traj: *const TiTrajectory, out: *mut f64) -> TiStatus {
    guard(|| write_out(out, ref_arg(traj, "traj")?.0.total_duration(), "out"))
}

/// # Safety
/// `traj` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_trajectory_len(traj: *const TiTrajectory, out: *mut usize) -> TiStatus {
    guard(|| write_out(out, ref_arg(traj, "traj")?.0.len(), "out"))
}

/// Generates one condition, e.g. `"fast_StoF_pause"`. `params_json` may be
/// null for defaults; otherwise it is a generator parameter object whose
/// missing fields take default values.
///
/// # Safety
/// String arguments must be NUL-terminated (or null where allowed); `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_generate_condition(
    condition_id: *const c_char,
    params_json: *const c_char,
    out: *mut *mut TiTrajectory,
) -> TiStatus {
    guard(|| {
        let spec: ConditionSpec = str_arg(condition_id, "condition_id")?.parse().map_err(from_error)?;
        let cfg: GeneratorConfig = if params_json.is_null() {
            GeneratorConfig::default()
        } else {
            parse(str_arg(params_json, "params_json")?, "generator params")?
        };
        let params = cfg.resolve().map_err(from_error)?;
        let traj = generate_condition(spec, &params).map_err(from_error)?;
        write_out(out, Box::into_raw(Box::new(TiTrajectory(traj))), "out")
    })
}

/// Parses a model configuration such as `{"model": "confidence"}`.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_model_from_json(json: *const c_char, out: *mut *mut TiModel) -> TiStatus {
    guard(|| {
        let cfg = ModelConfig::from_json(str_arg(json, "json")?).map_err(from_error)?;
        write_out(out, Box::into_raw(Box::new(TiModel(cfg))), "out")
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ti_model_free(model: *mut TiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of hidden-state values the model ranges over.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_model_support_len(model: *const TiModel, out: *mut usize) -> TiStatus {
    guard(|| write_out(out, ref_arg(model, "model")?.0.support.len(), "out"))
}

/// Label of support entry `index`, as a caller-owned string.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_model_support_label(
    model: *const TiModel,
    index: usize,
    out: *mut *mut c_char,
) -> TiStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let values = m.0.support.values();
        let v = values.get(index).ok_or_else(|| {
            fail(
                TiStatus::InvalidInput,
                format!("support index {index} out of range for {} values", values.len()),
            )
        })?;
        write_string(out, v.label.clone())
    })
}

/// Posterior over the model's support for `traj`, written in support order
/// to `probs[0..probs_len]`. The normalizing family is `family[0..family_len]`;
/// pass a null `family` to use `traj` alone.
///
/// # Safety
/// All handles must be live; `family` must point to `family_len` handles;
/// `probs` must have room for `probs_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ti_model_posterior(
    model: *const TiModel,
    traj: *const TiTrajectory,
    family: *const *const TiTrajectory,
    family_len: usize,
    probs: *mut f64,
    probs_len: usize,
) -> TiStatus {
    guard(|| {
        let m = ref_arg(model, "model")?;
        let t = ref_arg(traj, "traj")?;
        let members: Vec<TimedTrajectory> = if family.is_null() {
            vec![t.0.clone()]
        } else {
            std::slice::from_raw_parts(family, family_len)
                .iter()
                .map(|p| ref_arg(*p, "family member").map(|h| h.0.clone()))
                .collect::<Result<_, _>>()?
        };
        let post = m.0.posterior(&t.0, &members).map_err(from_error)?;
        let p = post.probabilities();
        if probs.is_null() {
            return Err(fail(TiStatus::NullOrEncoding, "probs is null"));
        }
        if probs_len < p.len() {
            return Err(fail(
                TiStatus::BufferTooSmall,
                format!("need {} entries, got {probs_len}", p.len()),
            ));
        }
        std::slice::from_raw_parts_mut(probs, p.len()).copy_from_slice(&p);
        Ok(())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizeRequest {
    path: Path,
    model: serde_json::Value,
    target: String,
    constraints: OptimizeConstraints,
    #[serde(default = "default_search")]
    search: SearchMode,
}

fn default_search() -> SearchMode {
    SearchMode::Exhaustive
}

/// Timing search. Request:
/// `{"path": {"waypoints": ..}, "model": {..}, "target": "high",
///   "constraints": {..}, "search": "exhaustive" | "coordinate_descent"}`.
/// The report is returned as JSON.
///
/// # Safety
/// `request_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_optimize_json(request_json: *const c_char, out: *mut *mut c_char) -> TiStatus {
    guard(|| {
        let req: OptimizeRequest = parse(str_arg(request_json, "request_json")?, "optimize request")?;
        let cfg = ModelConfig::from_json(&req.model.to_string()).map_err(from_error)?;
        let report = optimize(&req.path, &cfg, &req.target, &req.constraints, req.search).map_err(from_error)?;
        write_string(out, serde_json::to_string(&report).expect("report serializes"))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FitRequest {
    model: serde_json::Value,
    ratings: ConditionRatings,
    conditions: std::collections::BTreeMap<String, TimedTrajectory>,
    #[serde(default)]
    grid: Option<GridSpec>,
}

/// Grid fit. Request:
/// `{"model": {..}, "ratings": {"<id>": 4.2, ..},
///   "conditions": {"<id>": <trajectory>, ..}, "grid": {..}?}`.
/// The conditions form the normalizing family. The result is returned as JSON.
///
/// # Safety
/// `request_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ti_fit_json(request_json: *const c_char, out: *mut *mut c_char) -> TiStatus {
    guard(|| {
        let req: FitRequest = parse(str_arg(request_json, "request_json")?, "fit request")?;
        let cfg = ModelConfig::from_json(&req.model.to_string()).map_err(from_error)?;
        let set = ConditionSet::new(req.conditions.into_iter().collect()).map_err(from_error)?;
        let grid = req.grid.unwrap_or_else(|| GridSpec::default_for(cfg.kind()));
        let result = fit(&cfg, &set, &req.ratings, &grid).map_err(from_error)?;
        write_string(out, serde_json::to_string(&result).expect("result serializes"))
    })
}
