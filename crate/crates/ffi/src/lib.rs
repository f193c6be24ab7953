//! C interface to the strip-guidance library.
//!
//! Scenarios and solutions are opaque handles owned by the caller and released
//! with their `*_free` function. Every fallible call returns an [`SgStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`sg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use strip_guidance::config::ScenarioConfig;
use strip_guidance::ocp::{solve_method, Method, MethodResult, StripScenario};
use strip_guidance::Error;

/// Status codes. The non-zero solver codes match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    Config = 2,
    NotConverged = 3,
    Kinematic = 4,
    NullPointer = 5,
    InvalidArgument = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgMethod {
    Linear = 0,
    MinIntegral = 1,
    MinMax = 2,
}

/// Profile metrics of a solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SgMetrics {
    /// Integral of the squared rate, (deg/s)^2 s.
    pub integral_rate_sq: f64,
    /// Peak rate, deg/s.
    pub max_rate: f64,
    /// Terminal arc-angle error, rad.
    pub terminal_error: f64,
    /// Normalized line-rate bound violation; NaN without bounds.
    pub bound_violation: f64,
    pub min_f_ccd: f64,
    pub max_f_ccd: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One grid node of a solution profile.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SgNode {
    pub t: f64,
    pub s: f64,
    pub u: f64,
    /// Scalar-first unit quaternion, inertial to desired frame.
    pub quaternion: [f64; 4],
    /// Inertial rate, rad/s.
    pub omega: [f64; 3],
    /// Inertial acceleration, rad/s^2.
    pub alpha: [f64; 3],
    pub f_ccd: f64,
    pub drift: f64,
}

/// Opaque scenario handle.
pub struct SgScenario {
    config: ScenarioConfig,
    scenario: StripScenario,
}

/// Opaque solution handle.
pub struct SgSolution {
    result: MethodResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> SgStatus {
    match err {
        Error::Config { .. } | Error::Validation(_) | Error::Io(_) => SgStatus::Config,
        Error::DegenerateGeometry(_) | Error::Singular(_) | Error::Impact { .. } => SgStatus::Kinematic,
        Error::Divergence { .. } | Error::SweepFailure { .. } => SgStatus::NotConverged,
    }
}

fn guard(f: impl FnOnce() -> Result<SgStatus, (SgStatus, String)>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SgStatus::Panic
        }
    }
}

fn fail(err: Error) -> (SgStatus, String) {
    (status_of(&err), err.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SgStatus, String)> {
    if p.is_null() {
        return Err((SgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SgStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn build(config: ScenarioConfig) -> Result<Box<SgScenario>, (SgStatus, String)> {
    let scenario = config.build().map_err(fail)?;
    Ok(Box::new(SgScenario { config, scenario }))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_scenario_from_toml(toml: *const c_char, out: *mut *mut SgScenario) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return Err((SgStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let text = read_str(toml, "toml")?;
        let config = ScenarioConfig::from_toml_str(text).map_err(fail)?;
        *out = Box::into_raw(build(config)?);
        Ok(SgStatus::Ok)
    })
}

/// Loads a scenario TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_scenario_load(path: *const c_char, out: *mut *mut SgScenario) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return Err((SgStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let path = read_str(path, "path")?;
        let config = ScenarioConfig::load(path).map_err(fail)?;
        *out = Box::into_raw(build(config)?);
        Ok(SgStatus::Ok)
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sg_scenario_free(scenario: *mut SgScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of grid nodes, 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_scenario_nodes(scenario: *const SgScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.scenario.horizon.nodes())
}

/// Solves one method. A solution that did not converge is still returned in
/// `out`, with status `NotConverged`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_solve(
    scenario: *const SgScenario,
    method: SgMethod,
    constrained: bool,
    out: *mut *mut SgSolution,
) -> SgStatus {
    guard(|| {
        if out.is_null() {
            return Err((SgStatus::NullPointer, "out is null".into()));
        }
        *out = ptr::null_mut();
        let sc = scenario
            .as_ref()
            .ok_or((SgStatus::NullPointer, "scenario is null".to_string()))?;
        let method = match method {
            SgMethod::Linear => Method::Linear,
            SgMethod::MinIntegral => Method::MinIntegral,
            SgMethod::MinMax => Method::MinMax,
        };
        if constrained && method != Method::MinIntegral {
            return Err((
                SgStatus::InvalidArgument,
                "only the min-integral method supports line-rate bounds".into(),
            ));
        }
        let result = solve_method(&sc.scenario, method, constrained, sc.config.run.sharpness, &sc.config.solver)
            .map_err(fail)?;
        let converged = result.converged;
        *out = Box::into_raw(Box::new(SgSolution { result }));
        if converged {
            Ok(SgStatus::Ok)
        } else {
            set_error("solver did not converge");
            Ok(SgStatus::NotConverged)
        }
    })
}

/// # Safety
/// `solution` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sg_solution_free(solution: *mut SgSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_solution_metrics(solution: *const SgSolution, out: *mut SgMetrics) -> SgStatus {
    guard(|| {
        let sol = solution
            .as_ref()
            .ok_or((SgStatus::NullPointer, "solution is null".to_string()))?;
        let out = out.as_mut().ok_or((SgStatus::NullPointer, "out is null".to_string()))?;
        let m = sol.result.report.metrics;
        *out = SgMetrics {
            integral_rate_sq: m.integral_rate_sq,
            max_rate: m.max_rate,
            terminal_error: m.terminal_error,
            bound_violation: m.bound_violation.unwrap_or(f64::NAN),
            min_f_ccd: m.min_f_ccd,
            max_f_ccd: m.max_f_ccd,
            iterations: sol.result.iterations,
            converged: sol.result.converged,
        };
        Ok(SgStatus::Ok)
    })
}

/// Number of profile nodes, 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_solution_len(solution: *const SgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.result.report.nodes.len())
}

/// Copies the profile into `nodes`, which must hold `len` entries with
/// `len >= sg_solution_len(solution)`.
///
/// # Safety
/// `solution` must be a live handle and `nodes` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sg_solution_profile(solution: *const SgSolution, nodes: *mut SgNode, len: usize) -> SgStatus {
    guard(|| {
        let sol = solution
            .as_ref()
            .ok_or((SgStatus::NullPointer, "solution is null".to_string()))?;
        if nodes.is_null() {
            return Err((SgStatus::NullPointer, "nodes is null".into()));
        }
        let src = &sol.result.report.nodes;
        if len < src.len() {
            return Err((
                SgStatus::InvalidArgument,
                format!("buffer holds {len} nodes, profile has {}", src.len()),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(nodes, src.len());
        for (d, n) in dst.iter_mut().zip(src) {
            *d = SgNode {
                t: n.t,
                s: n.s,
                u: n.u,
                quaternion: n.quaternion,
                omega: [n.omega.x, n.omega.y, n.omega.z],
                alpha: [n.alpha.x, n.alpha.y, n.alpha.z],
                f_ccd: n.f_ccd,
                drift: n.drift,
            };
        }
        Ok(SgStatus::Ok)
    })
}
