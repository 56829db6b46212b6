//! C ABI for the secure massive NOMA library.
//!
//! Scenarios travel as opaque handles created from scenario text (the same
//! plain-text schema the CLI reads) and released with
//! [`noma_scenario_free`]. Every entry point returns a [`NomaStatus`];
//! failures leave a thread-local message retrievable with
//! [`noma_last_error`]. Per-user outputs use the flat user order: cluster
//! by cluster, strongest user first.
//!
//! The generated header lands in `include/noma_lab.h`.
//!
//! Pointer contracts (nullability, required lengths) are stated on each
//! entry point.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use noma_lab::config::SystemConfig;
use noma_lab::estimation::compute_rho;
use noma_lab::montecarlo::estimate_rates;
use noma_lab::optimizer::{
    op2_maxmin_q, op3_minpower_q, op4_maxmin_p, op5_minpower_p, OptimizeError, PowerSolution,
    SearchStrategy,
};
use noma_lab::rates::{eve_rate_closed_form, legit_rate_closed_form, secrecy_rate};
use noma_lab::scenario::{load_scenario, parse_scenario, presets};

/// Result code of every C entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The scenario text did not parse.
    ParseError = 3,
    /// The scenario violates a structural invariant.
    InvalidConfig = 4,
    /// An output buffer is shorter than the user count.
    BufferTooSmall = 5,
    /// The optimization admits no feasible power vector.
    Infeasible = 6,
    /// The max-min search is infeasible already at its initial target.
    InfeasibleAtStart = 7,
    /// An argument value is out of range.
    InvalidArgument = 8,
    /// An unexpected internal failure; details via `noma_last_error`.
    InternalError = 9,
}

/// Opaque scenario handle.
pub struct NomaScenario {
    config: SystemConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).unwrap_or_default();
    });
}

fn fail(status: NomaStatus, message: impl Into<String>) -> NomaStatus {
    set_error(message);
    status
}

/// Copy the last error message of this thread into `buffer` (NUL
/// terminated, truncated to `len` bytes) and return the full length of the
/// message, not counting the terminator. A zero return means no error has
/// been recorded. `buffer` may be null to query the length alone.
#[no_mangle]
pub unsafe extern "C" fn noma_last_error(buffer: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && len > 0 {
            let count = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, count);
            // Guarantee termination even when truncating.
            *buffer.add(count - 1) = 0;
        }
        bytes.len() - 1
    })
}

fn wrap_handle(result: Result<SystemConfig, String>) -> *mut NomaScenario {
    match result {
        Ok(config) => {
            let report = config.validate();
            if let Some(first) = report.first_violation() {
                set_error(format!("invalid scenario: {first}"));
                return std::ptr::null_mut();
            }
            Box::into_raw(Box::new(NomaScenario { config }))
        }
        Err(message) => {
            set_error(message);
            std::ptr::null_mut()
        }
    }
}

/// Parse scenario text into a handle. Returns null on failure; see
/// `noma_last_error`.
#[no_mangle]
pub unsafe extern "C" fn noma_scenario_parse(text: *const c_char) -> *mut NomaScenario {
    if text.is_null() {
        set_error("scenario text is null");
        return std::ptr::null_mut();
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(text) => text,
        Err(_) => {
            set_error("scenario text is not valid UTF-8");
            return std::ptr::null_mut();
        }
    };
    wrap_handle(parse_scenario(text).map_err(|e| e.to_string()))
}

/// Load a scenario file into a handle. Returns null on failure.
#[no_mangle]
pub unsafe extern "C" fn noma_scenario_load(path: *const c_char) -> *mut NomaScenario {
    if path.is_null() {
        set_error("scenario path is null");
        return std::ptr::null_mut();
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(path) => path,
        Err(_) => {
            set_error("scenario path is not valid UTF-8");
            return std::ptr::null_mut();
        }
    };
    wrap_handle(load_scenario(Path::new(path)).map_err(|e| e.to_string()))
}

/// The built-in default scenario.
#[no_mangle]
pub extern "C" fn noma_scenario_default() -> *mut NomaScenario {
    Box::into_raw(Box::new(NomaScenario { config: presets::default_scenario() }))
}

/// Release a handle. Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn noma_scenario_free(scenario: *mut NomaScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of users across all clusters; zero for a null handle.
#[no_mangle]
pub unsafe extern "C" fn noma_scenario_user_count(scenario: *const NomaScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).config.user_count()
}

unsafe fn fill(slice: *mut f64, values: impl Iterator<Item = f64>) {
    if slice.is_null() {
        return;
    }
    for (i, value) in values.enumerate() {
        *slice.add(i) = value;
    }
}

/// Closed-form per-user rates in flat user order. Any of the three output
/// arrays may be null to skip it; non-null arrays must hold at least `len`
/// elements and `len` must be at least the user count.
#[no_mangle]
pub unsafe extern "C" fn noma_analyze(
    scenario: *const NomaScenario,
    legit: *mut f64,
    eve: *mut f64,
    secrecy: *mut f64,
    len: usize,
) -> NomaStatus {
    if scenario.is_null() {
        return fail(NomaStatus::NullArgument, "scenario handle is null");
    }
    let config = &(*scenario).config;
    if len < config.user_count() {
        return fail(
            NomaStatus::BufferTooSmall,
            format!("need {} elements, got {len}", config.user_count()),
        );
    }
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let model = compute_rho(config);
        let rows: Vec<(f64, f64)> = config
            .iter_users()
            .map(|(m, n)| {
                (
                    legit_rate_closed_form(config, &model, m, n),
                    eve_rate_closed_form(config, &model, m, n),
                )
            })
            .collect();
        fill(legit, rows.iter().map(|r| r.0));
        fill(eve, rows.iter().map(|r| r.1));
        fill(secrecy, rows.iter().map(|r| secrecy_rate(r.0, r.1)));
    }));
    match outcome {
        Ok(()) => NomaStatus::Ok,
        Err(_) => fail(NomaStatus::InternalError, "panic during analysis"),
    }
}

/// Monte Carlo per-user rate estimates (means and standard errors for the
/// legitimate and eavesdropping channels), deterministic in `seed`. Output
/// arrays may be null to skip; `trials` must be at least 100.
#[no_mangle]
pub unsafe extern "C" fn noma_estimate_rates(
    scenario: *const NomaScenario,
    trials: usize,
    seed: u64,
    user_mean: *mut f64,
    user_se: *mut f64,
    eve_mean: *mut f64,
    eve_se: *mut f64,
    len: usize,
) -> NomaStatus {
    if scenario.is_null() {
        return fail(NomaStatus::NullArgument, "scenario handle is null");
    }
    let config = &(*scenario).config;
    if trials < 100 {
        return fail(NomaStatus::InvalidArgument, "at least 100 trials required");
    }
    if len < config.user_count() {
        return fail(
            NomaStatus::BufferTooSmall,
            format!("need {} elements, got {len}", config.user_count()),
        );
    }
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let (users, eves) = estimate_rates(config, trials, seed);
        fill(user_mean, users.mean.iter().copied());
        fill(user_se, users.std_error.iter().copied());
        fill(eve_mean, eves.mean.iter().copied());
        fill(eve_se, eves.std_error.iter().copied());
    }));
    match outcome {
        Ok(()) => NomaStatus::Ok,
        Err(_) => fail(NomaStatus::InternalError, "panic during simulation"),
    }
}

unsafe fn deliver_solution(
    config: &SystemConfig,
    result: Result<PowerSolution, OptimizeError>,
    powers: *mut f64,
    len: usize,
    objective_out: *mut f64,
) -> NomaStatus {
    if len < config.user_count() {
        return fail(
            NomaStatus::BufferTooSmall,
            format!("need {} elements, got {len}", config.user_count()),
        );
    }
    match result {
        Ok(solution) => {
            fill(powers, solution.vars.iter().copied());
            if !objective_out.is_null() {
                *objective_out = solution.objective;
            }
            NomaStatus::Ok
        }
        Err(OptimizeError::InfeasibleAtStart) => {
            fail(NomaStatus::InfeasibleAtStart, OptimizeError::InfeasibleAtStart.to_string())
        }
        Err(error) => fail(NomaStatus::Infeasible, error.to_string()),
    }
}

/// Maximize the minimum user rate over the pilot powers under the
/// eavesdropping cap `r_e` and per-user pilot cap `q_max`. On success
/// `powers` receives the pilot powers (flat user order) and `r_o_out` the
/// certified minimum-rate target.
#[no_mangle]
pub unsafe extern "C" fn noma_optimize_max_min_pilot(
    scenario: *const NomaScenario,
    r_e: f64,
    q_max: f64,
    delta_o: f64,
    powers: *mut f64,
    len: usize,
    r_o_out: *mut f64,
) -> NomaStatus {
    if scenario.is_null() {
        return fail(NomaStatus::NullArgument, "scenario handle is null");
    }
    if delta_o.is_nan() || delta_o <= 0.0 {
        return fail(NomaStatus::InvalidArgument, "delta_o must be positive");
    }
    let config = &(*scenario).config;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        op2_maxmin_q(config, r_e, q_max, delta_o, SearchStrategy::Bisection)
    }));
    match outcome {
        Ok(result) => deliver_solution(config, result, powers, len, r_o_out),
        Err(_) => fail(NomaStatus::InternalError, "panic during optimization"),
    }
}

/// Minimize the total pilot power subject to the eavesdropping cap and the
/// per-user rate floor. `total_out` receives the minimal total.
#[no_mangle]
pub unsafe extern "C" fn noma_optimize_min_pilot(
    scenario: *const NomaScenario,
    r_e: f64,
    r_o: f64,
    q_max: f64,
    powers: *mut f64,
    len: usize,
    total_out: *mut f64,
) -> NomaStatus {
    if scenario.is_null() {
        return fail(NomaStatus::NullArgument, "scenario handle is null");
    }
    let config = &(*scenario).config;
    let outcome = catch_unwind(AssertUnwindSafe(|| op3_minpower_q(config, r_e, r_o, q_max)));
    match outcome {
        Ok(result) => deliver_solution(config, result, powers, len, total_out),
        Err(_) => fail(NomaStatus::InternalError, "panic during optimization"),
    }
}

/// Maximize the minimum user rate over the transmit powers under the
/// eavesdropping cap, total budget `p_tot`, and the nondecreasing
/// in-cluster ordering.
#[no_mangle]
pub unsafe extern "C" fn noma_optimize_max_min_tx(
    scenario: *const NomaScenario,
    r_e: f64,
    p_tot: f64,
    delta_o: f64,
    powers: *mut f64,
    len: usize,
    r_o_out: *mut f64,
) -> NomaStatus {
    if scenario.is_null() {
        return fail(NomaStatus::NullArgument, "scenario handle is null");
    }
    if delta_o.is_nan() || delta_o <= 0.0 {
        return fail(NomaStatus::InvalidArgument, "delta_o must be positive");
    }
    let config = &(*scenario).config;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let model = compute_rho(config);
        op4_maxmin_p(config, &model, r_e, p_tot, delta_o, SearchStrategy::Bisection)
    }));
    match outcome {
        Ok(result) => deliver_solution(config, result, powers, len, r_o_out),
        Err(_) => fail(NomaStatus::InternalError, "panic during optimization"),
    }
}

/// Minimize the total transmit power subject to the eavesdropping cap, the
/// rate floor, the budget, and the in-cluster ordering.
#[no_mangle]
pub unsafe extern "C" fn noma_optimize_min_tx(
    scenario: *const NomaScenario,
    r_e: f64,
    r_o: f64,
    p_tot: f64,
    powers: *mut f64,
    len: usize,
    total_out: *mut f64,
) -> NomaStatus {
    if scenario.is_null() {
        return fail(NomaStatus::NullArgument, "scenario handle is null");
    }
    let config = &(*scenario).config;
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let model = compute_rho(config);
        op5_minpower_p(config, &model, r_e, r_o, p_tot)
    }));
    match outcome {
        Ok(result) => deliver_solution(config, result, powers, len, total_out),
        Err(_) => fail(NomaStatus::InternalError, "panic during optimization"),
    }
}
