//! C ABI over `jsdm-core`.
//!
//! Objects are opaque handles created by `jsdm_*_load`/`jsdm_select`/
//! `jsdm_sweep`/`jsdm_compare` and released with the matching `*_free`.
//! Every fallible call returns a [`JsdmStatus`]; on failure the message is
//! available from [`jsdm_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use jsdm::eval::{compare_modes, default_algorithms, run_sweep, EvalResult, Mode, Scenario};
use jsdm::grouping::SelectionResult;
use jsdm::{io, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JsdmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// A file could not be read or written.
    Io = 3,
    /// A file could not be parsed or failed schema validation.
    Parse = 4,
    /// The model rejected its input (geometry, profiles, dimensions).
    Model = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// One row of a results table.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsdmPoint {
    pub grid_db: f64,
    pub sum_rate_bps_hz: f64,
    pub sum_rate_stderr: f64,
    pub users_served_mean: f64,
}

pub struct JsdmScenario {
    inner: Scenario,
}

pub struct JsdmSelection {
    inner: SelectionResult,
}

pub struct JsdmResults {
    inner: Vec<EvalResult>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn classify(e: &Error) -> JsdmStatus {
    match e {
        Error::Io { .. } => JsdmStatus::Io,
        Error::Parse(_) | Error::Schema { .. } => JsdmStatus::Parse,
        Error::Config(_) => JsdmStatus::InvalidArgument,
        _ => JsdmStatus::Model,
    }
}

fn fail(status: JsdmStatus, msg: impl Into<String>) -> JsdmStatus {
    set_error(msg.into());
    status
}

/// Run `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), JsdmStatus>) -> JsdmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JsdmStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(JsdmStatus::Panic, msg)
        }
    }
}

fn lift(e: Error) -> JsdmStatus {
    fail(classify(&e), e.to_string())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, JsdmStatus> {
    if p.is_null() {
        return Err(fail(JsdmStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(JsdmStatus::InvalidArgument, "path is not valid UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, JsdmStatus> {
    p.as_ref()
        .ok_or_else(|| fail(JsdmStatus::NullPointer, format!("{what} handle is null")))
}

unsafe fn out_ptr<T>(out: *mut *mut T) -> Result<(), JsdmStatus> {
    if out.is_null() {
        return Err(fail(JsdmStatus::NullPointer, "output pointer is null"));
    }
    *out = ptr::null_mut();
    Ok(())
}

/// Message describing the last failure on this thread, or null. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn jsdm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn jsdm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load and validate a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsdm_scenario_load(
    path: *const c_char,
    out: *mut *mut JsdmScenario,
) -> JsdmStatus {
    guard(|| {
        out_ptr(out)?;
        let path = path_arg(path)?;
        let inner = io::load_scenario(path).map_err(lift)?;
        *out = Box::into_raw(Box::new(JsdmScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`jsdm_scenario_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jsdm_scenario_free(s: *mut JsdmScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of user profiles (conflict-graph nodes).
///
/// # Safety
/// `s` must be a live scenario handle or null.
#[no_mangle]
pub unsafe extern "C" fn jsdm_scenario_profile_count(s: *const JsdmScenario) -> usize {
    s.as_ref().map_or(0, |s| s.inner.profiles.len())
}

/// Override the master seed.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn jsdm_scenario_set_seed(s: *mut JsdmScenario, seed: u64) -> JsdmStatus {
    guard(|| {
        let s = s
            .as_mut()
            .ok_or_else(|| fail(JsdmStatus::NullPointer, "scenario handle is null"))?;
        s.inner.config.seed = seed;
        Ok(())
    })
}

/// Override the number of trials (must be at least 1).
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn jsdm_scenario_set_trials(s: *mut JsdmScenario, trials: usize) -> JsdmStatus {
    guard(|| {
        let s = s
            .as_mut()
            .ok_or_else(|| fail(JsdmStatus::NullPointer, "scenario handle is null"))?;
        if trials == 0 {
            return Err(fail(JsdmStatus::InvalidArgument, "trials must be at least 1"));
        }
        s.inner.config.trials = trials;
        Ok(())
    })
}

/// Override the Greedy Algorithm 2 threshold (non-negative).
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn jsdm_scenario_set_epsilon(s: *mut JsdmScenario, epsilon: f64) -> JsdmStatus {
    guard(|| {
        let s = s
            .as_mut()
            .ok_or_else(|| fail(JsdmStatus::NullPointer, "scenario handle is null"))?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(fail(JsdmStatus::InvalidArgument, "epsilon must be non-negative"));
        }
        s.inner.config.epsilon = epsilon;
        Ok(())
    })
}

/// Run the scenario's user selection.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsdm_select(s: *const JsdmScenario, out: *mut *mut JsdmSelection) -> JsdmStatus {
    guard(|| {
        out_ptr(out)?;
        let s = handle(s, "scenario")?;
        let inner = s.inner.select().map_err(lift)?;
        *out = Box::into_raw(Box::new(JsdmSelection { inner }));
        Ok(())
    })
}

/// # Safety
/// `sel` must come from [`jsdm_select`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jsdm_selection_free(sel: *mut JsdmSelection) {
    if !sel.is_null() {
        drop(Box::from_raw(sel));
    }
}

/// Number of selected profiles.
///
/// # Safety
/// `sel` must be a live selection handle or null.
#[no_mangle]
pub unsafe extern "C" fn jsdm_selection_count(sel: *const JsdmSelection) -> usize {
    sel.as_ref().map_or(0, |s| s.inner.count())
}

/// 1 if profile `index` is selected, 0 if not, -1 if out of range or null.
///
/// # Safety
/// `sel` must be a live selection handle or null.
#[no_mangle]
pub unsafe extern "C" fn jsdm_selection_is_selected(sel: *const JsdmSelection, index: usize) -> i32 {
    match sel.as_ref().and_then(|s| s.inner.x.get(index)) {
        Some(true) => 1,
        Some(false) => 0,
        None => -1,
    }
}

/// Objective value of the selection (Q1, or the cardinality for Q2 searches).
///
/// # Safety
/// `sel` must be a live selection handle or null.
#[no_mangle]
pub unsafe extern "C" fn jsdm_selection_objective(sel: *const JsdmSelection) -> f64 {
    sel.as_ref().map_or(f64::NAN, |s| s.inner.objective)
}

/// Simulate the scenario's own mode and algorithm.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsdm_sweep(s: *const JsdmScenario, out: *mut *mut JsdmResults) -> JsdmStatus {
    guard(|| {
        out_ptr(out)?;
        let s = handle(s, "scenario")?;
        let r = run_sweep(&s.inner).map_err(lift)?;
        *out = Box::into_raw(Box::new(JsdmResults { inner: vec![r] }));
        Ok(())
    })
}

/// Simulate every mode with the default algorithm set on shared draws.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsdm_compare(s: *const JsdmScenario, out: *mut *mut JsdmResults) -> JsdmStatus {
    guard(|| {
        out_ptr(out)?;
        let s = handle(s, "scenario")?;
        let algs = default_algorithms(s.inner.profiles.len());
        let inner = compare_modes(&s.inner, &Mode::ALL, &algs).map_err(lift)?;
        *out = Box::into_raw(Box::new(JsdmResults { inner }));
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`jsdm_sweep`] or [`jsdm_compare`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn jsdm_results_free(r: *mut JsdmResults) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of `(mode, algorithm)` series.
///
/// # Safety
/// `r` must be a live results handle or null.
#[no_mangle]
pub unsafe extern "C" fn jsdm_results_series_count(r: *const JsdmResults) -> usize {
    r.as_ref().map_or(0, |r| r.inner.len())
}

/// Number of grid points in series `series`.
///
/// # Safety
/// `r` must be a live results handle or null.
#[no_mangle]
pub unsafe extern "C" fn jsdm_results_point_count(r: *const JsdmResults, series: usize) -> usize {
    r.as_ref()
        .and_then(|r| r.inner.get(series))
        .map_or(0, |s| s.points.len())
}

/// Copy one grid point of one series into `out`.
///
/// # Safety
/// `r` must be a live results handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsdm_results_point(
    r: *const JsdmResults,
    series: usize,
    point: usize,
    out: *mut JsdmPoint,
) -> JsdmStatus {
    guard(|| {
        let r = handle(r, "results")?;
        let out = out
            .as_mut()
            .ok_or_else(|| fail(JsdmStatus::NullPointer, "output pointer is null"))?;
        let p = r
            .inner
            .get(series)
            .and_then(|s| s.points.get(point))
            .ok_or_else(|| fail(JsdmStatus::InvalidArgument, "series or point out of range"))?;
        *out = JsdmPoint {
            grid_db: p.grid_db,
            sum_rate_bps_hz: p.mean,
            sum_rate_stderr: p.stderr,
            users_served_mean: p.users_served_mean,
        };
        Ok(())
    })
}

/// Write the results table as CSV.
///
/// # Safety
/// `r` must be a live results handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn jsdm_results_export_csv(r: *const JsdmResults, path: *const c_char) -> JsdmStatus {
    guard(|| {
        let r = handle(r, "results")?;
        let path = path_arg(path)?;
        io::export_results(&r.inner, path).map_err(lift)
    })
}
