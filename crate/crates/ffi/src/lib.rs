//! C ABI for basketcheck.
//!
//! Models and results are opaque handles owned by the caller and released
//! with `bc_model_free` / `bc_result_free`. Every fallible call returns a
//! `BcStatus`; on failure `bc_last_error_message` describes the error for the
//! calling thread. Strings returned as `char *` must be released with
//! `bc_string_free`.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use basketcheck::engine::{self, EngineError, Method, QueryValue, SolveOptions};
use basketcheck::expr::parse_standalone;
use basketcheck::pctl::{self, bind_formula};
use basketcheck::prism::BuildOptions;
use basketcheck::{report, sim, Dtmc, LoadError, StateSet, VerificationResult};

/// Build flag: give deadlocked states a self-loop.
pub const BC_FIX_DEADLOCKS: u32 = 1;
/// Build flag: uniform choice among overlapping commands (non-standard).
pub const BC_MERGE_UNIFORM: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    BuildError = 4,
    BindError = 5,
    NotConverged = 6,
    InvalidArgument = 7,
    BufferTooSmall = 8,
    IoError = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcEngine {
    Exact = 0,
    Power = 1,
    Jacobi = 2,
    GaussSeidel = 3,
}

impl From<BcEngine> for Method {
    fn from(e: BcEngine) -> Method {
        match e {
            BcEngine::Exact => Method::Exact,
            BcEngine::Power => Method::Power,
            BcEngine::Jacobi => Method::Jacobi,
            BcEngine::GaussSeidel => Method::GaussSeidel,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BcEstimate {
    pub hits: u64,
    pub samples: u64,
    pub censored: u64,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Opaque built chain.
pub struct BcModel {
    dtmc: Dtmc,
}

/// Opaque verification result.
pub struct BcResult {
    result: VerificationResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: BcStatus, message: impl ToString) -> BcStatus {
    let msg = CString::new(message.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
    status
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, BcStatus> {
    if s.is_null() {
        return Err(fail(BcStatus::NullArgument, "null string argument"));
    }
    // SAFETY: caller guarantees a valid C string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|e| fail(BcStatus::InvalidUtf8, e))
}

fn options(flags: u32) -> BuildOptions {
    BuildOptions {
        fix_deadlocks: flags & BC_FIX_DEADLOCKS != 0,
        merge_uniform: flags & BC_MERGE_UNIFORM != 0,
    }
}

fn load_error(e: LoadError) -> BcStatus {
    match e {
        LoadError::Parse(p) => fail(BcStatus::ParseError, p),
        LoadError::Build(b) => fail(BcStatus::BuildError, b),
    }
}

fn engine_error(e: EngineError) -> BcStatus {
    match e {
        EngineError::NotConverged { .. } => fail(BcStatus::NotConverged, e),
        EngineError::BadEpsilon(_) => fail(BcStatus::InvalidArgument, e),
        _ => fail(BcStatus::BindError, e),
    }
}

fn solve_options(engine: BcEngine, epsilon: f64) -> SolveOptions {
    SolveOptions {
        method: engine.into(),
        epsilon: if epsilon > 0.0 { epsilon } else { SolveOptions::default().epsilon },
        ..SolveOptions::default()
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and builds a model from source text.
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_model_parse(
    source: *const c_char,
    flags: u32,
    out: *mut *mut BcModel,
) -> BcStatus {
    clear_error();
    if out.is_null() {
        return fail(BcStatus::NullArgument, "null output pointer");
    }
    // SAFETY: forwarded caller guarantee.
    let text = match unsafe { str_arg(source) } {
        Ok(t) => t,
        Err(s) => return s,
    };
    match basketcheck::load_model(text, options(flags)) {
        Ok(dtmc) => {
            // SAFETY: `out` checked non-null above.
            unsafe { *out = Box::into_raw(Box::new(BcModel { dtmc })) };
            BcStatus::Ok
        }
        Err(e) => load_error(e),
    }
}

/// Reads, parses and builds a model file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_model_load(
    path: *const c_char,
    flags: u32,
    out: *mut *mut BcModel,
) -> BcStatus {
    clear_error();
    // SAFETY: forwarded caller guarantee.
    let path = match unsafe { str_arg(path) } {
        Ok(p) => p,
        Err(s) => return s,
    };
    let text = match std::fs::read_to_string(Path::new(path)) {
        Ok(t) => t,
        Err(e) => return fail(BcStatus::IoError, format!("cannot read {path}: {e}")),
    };
    let text = match CString::new(text) {
        Ok(t) => t,
        Err(_) => return fail(BcStatus::InvalidUtf8, "model file contains NUL"),
    };
    // SAFETY: `text` is a valid C string; `out` forwarded.
    unsafe { bc_model_parse(text.as_ptr(), flags, out) }
}

/// # Safety
/// `model` must be null or a handle from `bc_model_parse`/`bc_model_load`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bc_model_free(model: *mut BcModel) {
    if !model.is_null() {
        // SAFETY: handle was created by Box::into_raw.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_num_states(model: *const BcModel) -> usize {
    // SAFETY: caller guarantee.
    unsafe { model.as_ref() }.map_or(0, |m| m.dtmc.num_states())
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_num_transitions(model: *const BcModel) -> usize {
    // SAFETY: caller guarantee.
    unsafe { model.as_ref() }.map_or(0, |m| m.dtmc.num_transitions())
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_initial_state(model: *const BcModel) -> usize {
    // SAFETY: caller guarantee.
    unsafe { model.as_ref() }.map_or(0, |m| m.dtmc.init_state())
}

/// Graphviz rendering of the chain; release with `bc_string_free`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_to_dot(model: *const BcModel) -> *mut c_char {
    // SAFETY: caller guarantee.
    match unsafe { model.as_ref() } {
        Some(m) => into_c_string(m.dtmc.to_dot()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn bc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: string was created by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses, binds and checks one property. `epsilon <= 0` selects the default.
///
/// # Safety
/// `model` must be a live handle, `property` a valid C string, `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_check(
    model: *const BcModel,
    property: *const c_char,
    engine: BcEngine,
    epsilon: f64,
    out: *mut *mut BcResult,
) -> BcStatus {
    clear_error();
    // SAFETY: caller guarantee.
    let (Some(model), false) = (unsafe { model.as_ref() }, out.is_null()) else {
        return fail(BcStatus::NullArgument, "null model or output pointer");
    };
    // SAFETY: forwarded caller guarantee.
    let text = match unsafe { str_arg(property) } {
        Ok(t) => t.trim(),
        Err(s) => return s,
    };
    let prop = match pctl::parse_property(text) {
        Ok(p) => p,
        Err(e) => return fail(BcStatus::ParseError, e),
    };
    let bound = match pctl::bind(&prop, &model.dtmc) {
        Ok(b) => b.with_text(text),
        Err(e) => return fail(BcStatus::BindError, e),
    };
    match engine::check_property(&model.dtmc, &bound, &solve_options(engine, epsilon)) {
        Ok(result) => {
            // SAFETY: `out` checked non-null above.
            unsafe { *out = Box::into_raw(Box::new(BcResult { result })) };
            BcStatus::Ok
        }
        Err(e) => engine_error(e),
    }
}

/// # Safety
/// `result` must be null or a live handle from `bc_check`.
#[no_mangle]
pub unsafe extern "C" fn bc_result_free(result: *mut BcResult) {
    if !result.is_null() {
        // SAFETY: handle was created by Box::into_raw.
        drop(unsafe { Box::from_raw(result) });
    }
}

/// 1 if the bound holds, 0 if not, -1 for queries or a null handle.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_result_verdict(result: *const BcResult) -> i32 {
    // SAFETY: caller guarantee.
    match unsafe { result.as_ref() }.and_then(|r| r.result.verdict) {
        Some(true) => 1,
        Some(false) => 0,
        None => -1,
    }
}

/// Number of satisfying states.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_result_count(result: *const BcResult) -> usize {
    // SAFETY: caller guarantee.
    unsafe { result.as_ref() }.map_or(0, |r| r.result.count())
}

/// Scalar query value at the evaluation state.
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_result_value(result: *const BcResult, out: *mut f64) -> BcStatus {
    clear_error();
    // SAFETY: caller guarantee.
    let (Some(r), false) = (unsafe { result.as_ref() }, out.is_null()) else {
        return fail(BcStatus::NullArgument, "null result or output pointer");
    };
    match &r.result.query {
        Some(QueryValue::Scalar { value, .. }) => {
            // SAFETY: checked non-null.
            unsafe { *out = *value };
            BcStatus::Ok
        }
        Some(QueryValue::Range { .. }) => fail(
            BcStatus::InvalidArgument,
            "filter matches several states; use bc_result_state_value",
        ),
        None => fail(BcStatus::InvalidArgument, "bound property has no scalar value"),
    }
}

/// Probability of the path formula at `state`.
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_result_state_value(
    result: *const BcResult,
    state: usize,
    out: *mut f64,
) -> BcStatus {
    clear_error();
    // SAFETY: caller guarantee.
    let (Some(r), false) = (unsafe { result.as_ref() }, out.is_null()) else {
        return fail(BcStatus::NullArgument, "null result or output pointer");
    };
    if state >= r.result.values.len() {
        return fail(BcStatus::InvalidArgument, format!("state {state} out of range"));
    }
    // SAFETY: checked non-null.
    unsafe { *out = r.result.values[state] };
    BcStatus::Ok
}

/// Two-line text report; release with `bc_string_free`.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_result_report(result: *const BcResult) -> *mut c_char {
    // SAFETY: caller guarantee.
    match unsafe { result.as_ref() } {
        Some(r) => into_c_string(report::text_report(&r.result)),
        None => ptr::null_mut(),
    }
}

fn goal_set(dtmc: &Dtmc, goal: &str) -> Result<StateSet, BcStatus> {
    let expr = parse_standalone(goal).map_err(|e| fail(BcStatus::ParseError, e))?;
    let bound = bind_formula(&expr, dtmc).map_err(|e| fail(BcStatus::BindError, e))?;
    dtmc.satisfaction_set(&bound)
        .map_err(|e| fail(BcStatus::BindError, e))
}

/// Writes the probability of eventually reaching `goal` from every state
/// into `out[0..num_states]`.
///
/// # Safety
/// `model` must be a live handle, `goal` a valid C string and `out` valid
/// for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bc_reach_probabilities(
    model: *const BcModel,
    goal: *const c_char,
    engine: BcEngine,
    epsilon: f64,
    out: *mut f64,
    len: usize,
) -> BcStatus {
    clear_error();
    // SAFETY: caller guarantee.
    let (Some(model), false) = (unsafe { model.as_ref() }, out.is_null()) else {
        return fail(BcStatus::NullArgument, "null model or output buffer");
    };
    let n = model.dtmc.num_states();
    if len < n {
        return fail(BcStatus::BufferTooSmall, format!("need {n} entries, got {len}"));
    }
    // SAFETY: forwarded caller guarantee.
    let goal = match unsafe { str_arg(goal) }.and_then(|g| goal_set(&model.dtmc, g)) {
        Ok(g) => g,
        Err(s) => return s,
    };
    match engine::reach_probabilities(&model.dtmc, &goal, &solve_options(engine, epsilon)) {
        Ok(sol) => {
            // SAFETY: `out` is valid for `len >= n` writes.
            let dst = unsafe { std::slice::from_raw_parts_mut(out, n) };
            dst.copy_from_slice(sol.values.as_slice());
            BcStatus::Ok
        }
        Err(e) => engine_error(e),
    }
}

/// Writes the distribution after `steps` steps from the initial state into
/// `out[0..num_states]`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bc_transient_distribution(
    model: *const BcModel,
    steps: u64,
    out: *mut f64,
    len: usize,
) -> BcStatus {
    clear_error();
    // SAFETY: caller guarantee.
    let (Some(model), false) = (unsafe { model.as_ref() }, out.is_null()) else {
        return fail(BcStatus::NullArgument, "null model or output buffer");
    };
    let n = model.dtmc.num_states();
    if len < n {
        return fail(BcStatus::BufferTooSmall, format!("need {n} entries, got {len}"));
    }
    let dist = engine::transient_distribution(&model.dtmc, steps);
    // SAFETY: `out` is valid for `len >= n` writes.
    unsafe { std::slice::from_raw_parts_mut(out, n) }.copy_from_slice(dist.as_slice());
    BcStatus::Ok
}

/// Monte Carlo estimate of reaching `goal` from `start`.
///
/// # Safety
/// `model` must be a live handle, `goal` a valid C string, `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_estimate_reach(
    model: *const BcModel,
    goal: *const c_char,
    start: usize,
    samples: u64,
    max_steps: u64,
    seed: u64,
    out: *mut BcEstimate,
) -> BcStatus {
    clear_error();
    // SAFETY: caller guarantee.
    let (Some(model), false) = (unsafe { model.as_ref() }, out.is_null()) else {
        return fail(BcStatus::NullArgument, "null model or output pointer");
    };
    if samples == 0 {
        return fail(BcStatus::InvalidArgument, "samples must be at least 1");
    }
    if start >= model.dtmc.num_states() {
        return fail(BcStatus::InvalidArgument, format!("start state {start} out of range"));
    }
    // SAFETY: forwarded caller guarantee.
    let goal = match unsafe { str_arg(goal) }.and_then(|g| goal_set(&model.dtmc, g)) {
        Ok(g) => g,
        Err(s) => return s,
    };
    let e = sim::estimate_reach(&model.dtmc, &goal, start, samples, max_steps, seed);
    // SAFETY: checked non-null.
    unsafe {
        *out = BcEstimate {
            hits: e.hits,
            samples: e.samples,
            censored: e.censored,
            estimate: e.estimate,
            low: e.low,
            high: e.high,
        }
    };
    BcStatus::Ok
}
