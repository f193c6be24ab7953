use serde::{Deserialize, Serialize};

use super::{
    backward_sweep, evaluate, forward_rollout, update_al, AlState, Gains, Matrix, Problem, Regularization,
    SweepResult, Trajectory, TrajectoryEval, ValueNode, Vector,
};
use crate::error::{Error, Result};

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Initial control step of the line search.
    pub k_u: f64,
    /// Multiplier step.
    pub k_nu: f64,
    /// Penalty growth factor.
    pub gamma: f64,
    /// Initial penalty weight.
    pub mu0: f64,
    pub eps_v: f64,
    pub eps_g: f64,
    pub eps_h: f64,
    /// Terminal-constraint tolerance (max norm).
    pub eps_psi: f64,
    pub max_iters: usize,
    /// Smallest control step tried before the nominal is kept.
    pub min_step: f64,
    pub reg_initial: f64,
    pub reg_factor: f64,
    pub reg_max: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            k_u: 0.5,
            k_nu: 0.5,
            gamma: 1.1,
            mu0: 1.0,
            eps_v: 1e-6,
            eps_g: 1e-6,
            eps_h: 1e-6,
            eps_psi: 1e-6,
            max_iters: 200,
            min_step: 1e-4,
            reg_initial: 1e-8,
            reg_factor: 10.0,
            reg_max: 1e2,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k_u", self.k_u),
            ("gamma", self.gamma),
            ("mu0", self.mu0),
            ("eps_v", self.eps_v),
            ("eps_g", self.eps_g),
            ("eps_h", self.eps_h),
            ("eps_psi", self.eps_psi),
            ("min_step", self.min_step),
            ("reg_initial", self.reg_initial),
            ("reg_max", self.reg_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("solver.{name} must be positive and finite")));
            }
        }
        if self.k_u > 1.0 {
            return Err(Error::validation("solver.k_u must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.k_nu) {
            return Err(Error::validation("solver.k_nu must lie in [0, 1]"));
        }
        if self.gamma <= 1.0 {
            return Err(Error::validation("solver.gamma must exceed 1"));
        }
        if self.reg_factor <= 1.0 || !self.reg_factor.is_finite() {
            return Err(Error::validation("solver.reg_factor must exceed 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::validation("solver.max_iters must be at least 1"));
        }
        Ok(())
    }

    pub fn regularization(&self) -> Regularization {
        Regularization {
            initial: self.reg_initial,
            factor: self.reg_factor,
            max: self.reg_max,
        }
    }
}

/// Starting point: initial state, controls on every interval and terminal multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialGuess {
    pub x0: Vector,
    pub us: Vec<Vector>,
    pub nu: Vector,
}

/// Diagnostics of one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective of the nominal at the start of the iteration.
    pub cost: f64,
    pub psi_norm: f64,
    /// `max(0, max g)`.
    pub g_violation: f64,
    pub h_violation: f64,
    pub expected_reduction: f64,
    /// Augmented cost of the nominal and of the accepted trajectory, both
    /// under the updated multipliers.
    pub merit_before: f64,
    pub merit_after: f64,
    /// Rounding resolution of the merit evaluation; changes below it are ties.
    pub merit_tolerance: f64,
    /// Control step accepted, 0 when the nominal was kept.
    pub step: f64,
    pub regularization: f64,
    /// Largest asymmetry of `V_xx` and `V_nunu` over the sweep.
    pub symmetry_error: f64,
    /// Smallest inequality multiplier after the update (0 without inequalities).
    pub min_lambda: f64,
}

/// Multiplier correction.
#[derive(Debug, Clone, PartialEq)]
pub struct NuStep {
    /// `-V_nunu^-1 V_nu` at `t0`.
    pub full: Vector,
    /// `k_nu * full`.
    pub applied: Vector,
    /// Shift used to make `-V_nunu` invertible.
    pub regularization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpSolution {
    pub trajectory: Trajectory,
    pub nu: Vector,
    pub al: AlState,
    pub eval: TrajectoryEval,
    /// Number of backward sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// Sweep about the returned trajectory.
    pub last_sweep: SweepResult,
}

/// Multiplier step from the initial value node.
pub fn update_nu(value: &ValueNode, k_nu: f64, reg: &Regularization) -> NuStep {
    let d = value.v_nu.len();
    if d == 0 {
        return NuStep {
            full: Vector::zeros(0),
            applied: Vector::zeros(0),
            regularization: 0.0,
        };
    }
    // V_nunu is negative definite at a regular point.
    let neg = -&value.v_nunu;
    let scale = neg.amax().max(1.0);
    let mut delta = 0.0;
    let full = loop {
        let shifted = &neg + Matrix::identity(d, d) * delta;
        if let Some(chol) = shifted.cholesky() {
            break chol.solve(&value.v_nu);
        }
        delta = if delta == 0.0 { reg.initial * scale } else { delta * reg.factor };
        if !(delta <= reg.max * scale) {
            log::warn!("V_nunu could not be regularized; multiplier step skipped");
            return NuStep {
                full: Vector::zeros(d),
                applied: Vector::zeros(d),
                regularization: delta,
            };
        }
    };
    if delta > 0.0 {
        log::warn!("V_nunu is not invertible; multiplier step regularized by {delta:.3e}");
    }
    NuStep {
        applied: k_nu * &full,
        full,
        regularization: delta,
    }
}

/// Forward pass with the feedback law
/// `u_k = ubar_k + k_u (beta_u + beta_nu dnu) + beta_x (x_k - xbar_k)`.
pub fn update_controls<P: Problem + ?Sized>(
    problem: &P,
    nominal: &Trajectory,
    gains: &[Gains],
    dnu: &Vector,
    k_u: f64,
) -> Result<Trajectory> {
    let horizon = nominal.horizon;
    let mut xs = Vec::with_capacity(horizon.nodes());
    let mut us = Vec::with_capacity(horizon.steps);
    xs.push(nominal.xs[0].clone());
    for (k, g) in gains.iter().enumerate() {
        let dx = &xs[k] - &nominal.xs[k];
        let mut du = &g.beta_x * dx;
        if k_u != 0.0 {
            let mut ff = g.beta_u.clone();
            if !dnu.is_empty() {
                ff += &g.beta_nu * dnu;
            }
            du += k_u * ff;
        }
        let u = &nominal.us[k] + du;
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k });
        }
        // Propagate one interval with the new control.
        let step = super::rollout::rk4_step(problem, &xs[k], &u, horizon.time(k), horizon.dt).0;
        if !step.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k + 1 });
        }
        xs.push(step);
        us.push(u);
    }
    Ok(Trajectory { horizon, xs, us })
}

/// Constrained DDP outer loop.
///
/// Each iteration refreshes the problem, sweeps about the nominal, checks
/// convergence, steps the terminal multiplier, line-searches the controls and
/// updates the path-constraint multipliers. A run that exhausts
/// `max_iters` is returned with `converged = false`.
pub fn solve<P: Problem + ?Sized>(problem: &mut P, guess: &InitialGuess, params: &SolverParams) -> Result<DdpSolution> {
    params.validate()?;
    let (n, m, d) = (problem.state_dim(), problem.control_dim(), problem.terminal_dim());
    let horizon = problem.horizon();
    if guess.x0.len() != n || guess.nu.len() != d || guess.us.iter().any(|u| u.len() != m) {
        return Err(Error::validation("initial guess dimensions do not match the problem"));
    }
    let reg = params.regularization();
    let mut traj = forward_rollout(problem, &guess.us, &guess.x0)?;
    let mut nu = guess.nu.clone();
    let mut al = AlState::new(
        problem.inequality_dim(),
        problem.equality_dim(),
        horizon.nodes(),
        params.mu0,
        params.gamma,
    );
    let mut history = Vec::new();

    for iteration in 1..=params.max_iters {
        problem.refresh(&traj.xs, &traj.us)?;
        let eval = evaluate(problem, &traj, &al)?;
        let sweep = backward_sweep(problem, &traj, &nu, &al, &reg)?;
        let g_violation = eval.max_g().max(0.0);
        let h_violation = eval.max_abs_h();
        let psi_norm = if d == 0 { 0.0 } else { eval.psi_norm() };

        let converged = sweep.expected_reduction.abs() <= params.eps_v
            && psi_norm <= params.eps_psi
            && g_violation <= params.eps_g
            && h_violation <= params.eps_h;
        let mut record = IterationRecord {
            iteration,
            cost: eval.cost(),
            psi_norm,
            g_violation,
            h_violation,
            expected_reduction: sweep.expected_reduction,
            merit_before: eval.merit(&nu),
            merit_after: eval.merit(&nu),
            merit_tolerance: merit_resolution(&eval, &nu),
            step: 0.0,
            regularization: sweep.max_regularization,
            symmetry_error: sweep.symmetry_error(),
            min_lambda: min_lambda(&al),
        };
        if converged {
            log_record(&record);
            history.push(record);
            return Ok(DdpSolution {
                trajectory: traj,
                nu,
                al,
                eval,
                iterations: iteration,
                converged: true,
                history,
                last_sweep: sweep,
            });
        }

        let nu_step = update_nu(sweep.initial(), params.k_nu, &reg);
        let nu_next = &nu + &nu_step.applied;
        let merit_nominal = eval.merit(&nu_next);
        record.merit_before = merit_nominal;
        record.merit_after = merit_nominal;
        let tolerance = merit_resolution(&eval, &nu_next);
        record.merit_tolerance = tolerance;
        let infeasibility = |e: &TrajectoryEval| {
            let psi = if d == 0 { 0.0 } else { e.psi_norm() };
            psi.max(e.max_g().max(0.0)).max(e.max_abs_h())
        };
        let nominal_infeasibility = infeasibility(&eval);

        let mut step = params.k_u;
        let mut accepted: Option<(Trajectory, TrajectoryEval)> = None;
        while step >= params.min_step {
            match update_controls(problem, &traj, &sweep.gains, &nu_step.applied, step) {
                Ok(candidate) => {
                    let candidate_eval = match evaluate(problem, &candidate, &al) {
                        Ok(e) => Some(e),
                        Err(e) if e.is_kinematic() => None,
                        Err(e) => return Err(e),
                    };
                    if let Some(ce) = candidate_eval {
                        let merit = ce.merit(&nu_next);
                        // Within rounding, a tie is broken by constraint satisfaction.
                        let improves = merit < merit_nominal
                            || (merit - merit_nominal <= tolerance && infeasibility(&ce) < nominal_infeasibility);
                        if merit.is_finite() && improves {
                            record.merit_after = merit;
                            record.step = step;
                            accepted = Some((candidate, ce));
                            break;
                        }
                    }
                }
                Err(Error::Divergence { .. }) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }

        nu = nu_next;
        let new_eval = match accepted {
            Some((candidate, ce)) => {
                traj = candidate;
                ce
            }
            None => eval,
        };
        al = update_al(&al, &new_eval.g, &new_eval.h);
        record.min_lambda = min_lambda(&al);
        log_record(&record);
        history.push(record);
    }

    problem.refresh(&traj.xs, &traj.us)?;
    let eval = evaluate(problem, &traj, &al)?;
    let last_sweep = backward_sweep(problem, &traj, &nu, &al, &reg)?;
    Ok(DdpSolution {
        trajectory: traj,
        nu,
        al,
        eval,
        iterations: params.max_iters,
        converged: false,
        history,
        last_sweep,
    })
}

fn min_lambda(al: &AlState) -> f64 {
    if al.lambda.is_empty() {
        0.0
    } else {
        al.lambda.min()
    }
}

/// Absolute rounding resolution of `eval.merit(nu)`.
fn merit_resolution(eval: &TrajectoryEval, nu: &Vector) -> f64 {
    let magnitude = eval.running.abs() + eval.terminal.abs() + eval.penalty.abs() + nu.dot(&eval.psi).abs();
    64.0 * f64::EPSILON * magnitude.max(f64::MIN_POSITIVE)
}

fn log_record(r: &IterationRecord) {
    log::debug!(
        target: "ddp",
        "iter={} cost={:.12e} psi={:.3e} g={:.3e} h={:.3e} dV={:.3e} step={} reg={:.1e} asym={:.1e} lambda_min={:.3e}",
        r.iteration,
        r.cost,
        r.psi_norm,
        r.g_violation,
        r.h_violation,
        r.expected_reduction,
        r.step,
        r.regularization,
        r.symmetry_error,
        r.min_lambda
    );
}
