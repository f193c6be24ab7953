//! Strip-imaging scan-rate optimal control problems.
//!
//! The state is the arc angle `s` travelled along the strip and the control
//! its rate `u = s_dot`. The minimum-integral problem penalizes the squared
//! desired-frame rate in (deg/s)^2; the min-max problem uses a nested
//! exponential surrogate rescaled to the peak rate every iteration.

mod oracle;
mod problem;
mod profile;
mod scenario;

use serde::{Deserialize, Serialize};

use crate::ddp::{solve, DdpSolution, InitialGuess, IterationRecord, SolverParams, Vector};
use crate::error::Result;

pub use oracle::{brute_force_oracle, OracleResult, MAX_ORACLE_GRID, MAX_ORACLE_STEPS};
pub use problem::{
    build_min_integral, build_minmax, rate_jet, Objective, RateJet, SoftmaxSchedule, StripProblem, DEG2,
    GRAD_STEP_S, GRAD_STEP_U_MIN, GRAD_STEP_U_REL, HESS_STEP_S, HESS_STEP_U_REL,
};
pub use profile::{evaluate_profile, line_rate_scale, zoh_rate_metrics, ProfileMetrics, ProfileNode, ProfileReport};
pub use scenario::{ScanSample, StripScenario};

/// Default `N * peak` of the min-max surrogate.
pub const DEFAULT_SHARPNESS: f64 = 3.0;

/// Constant-rate scan from `s = 0` to `s_f`, with `nu = 0`.
pub fn linear_guess(scenario: &StripScenario) -> InitialGuess {
    let rate = scenario.arc_length() / scenario.duration();
    InitialGuess {
        x0: Vector::zeros(1),
        us: vec![Vector::from_element(1, rate); scenario.horizon.steps],
        nu: Vector::zeros(1),
    }
}

/// Node states of the linear scan; the last node is exactly `s_f`.
pub fn linear_states(scenario: &StripScenario) -> Vec<f64> {
    let h = scenario.horizon;
    let sf = scenario.arc_length();
    (0..h.nodes())
        .map(|k| if k == h.steps { sf } else { sf * k as f64 / h.steps as f64 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Linear,
    MinIntegral,
    MinMax,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Linear, Method::MinIntegral, Method::MinMax];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::MinIntegral => "min-integral",
            Method::MinMax => "min-max",
        }
    }
}

/// Outcome of one method on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub constrained: bool,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub nu: f64,
    pub report: ProfileReport,
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

/// Runs one method. The linear scan is reported as is; the optimized
/// methods start from it.
pub fn solve_method(
    scenario: &StripScenario,
    method: Method,
    constrained: bool,
    sharpness: f64,
    params: &SolverParams,
) -> Result<MethodResult> {
    let guess = linear_guess(scenario);
    let solution: DdpSolution = match method {
        Method::Linear => {
            let s = linear_states(scenario);
            let u: Vec<f64> = guess.us.iter().map(|v| v[0]).collect();
            let report = evaluate_profile(scenario, &s, &u)?;
            return Ok(MethodResult {
                method,
                constrained: false,
                s,
                u,
                nu: 0.0,
                report,
                converged: true,
                iterations: 0,
                history: Vec::new(),
            });
        }
        Method::MinIntegral => {
            let mut p = build_min_integral(scenario, constrained)?;
            solve(&mut p, &guess, params)?
        }
        Method::MinMax => {
            let mut p = build_minmax(scenario, SoftmaxSchedule::new(sharpness)?, constrained)?;
            solve(&mut p, &guess, params)?
        }
    };
    let s: Vec<f64> = solution.trajectory.xs.iter().map(|x| x[0]).collect();
    let u: Vec<f64> = solution.trajectory.us.iter().map(|v| v[0]).collect();
    let report = evaluate_profile(scenario, &s, &u)?;
    Ok(MethodResult {
        method,
        constrained,
        s,
        u,
        nu: solution.nu[0],
        report,
        converged: solution.converged,
        iterations: solution.iterations,
        history: solution.history,
    })
}
