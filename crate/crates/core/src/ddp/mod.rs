//! Constrained differential dynamic programming.
//!
//! The horizon is split into `N` zero-order-hold control intervals. Each
//! interval is integrated with one RK4 step, and the running cost is
//! accumulated along the same RK4 stages, so a stage carries the exact
//! discrete map `x_{k+1} = F(x_k, u_k)` and the integral of `L` over the
//! interval including its right end. The value function is expanded jointly
//! in the state and the terminal-constraint multiplier `nu`; path constraints
//! are handled with an augmented Lagrangian evaluated at the grid nodes.

mod al;
mod rollout;
mod solver;
mod sweep;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use al::{update_al, AlState};
pub use rollout::{evaluate, forward_rollout, stage_expansion, StageExpansion, Trajectory, TrajectoryEval};
pub use solver::{
    solve, update_controls, update_nu, DdpSolution, InitialGuess, IterationRecord, NuStep, SolverParams,
};
pub use sweep::{backward_sweep, Gains, Regularization, SweepResult, ValueNode};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Uniform time grid `t0, t0 + dt, ..., t0 + steps * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Horizon {
    pub fn new(t0: f64, tf: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite() && dt.is_finite()) || dt <= 0.0 || tf <= t0 {
            return Err(Error::validation("horizon requires finite t0 < tf and dt > 0"));
        }
        let ratio = (tf - t0) / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
            return Err(Error::validation("(tf - t0) / dt must be a positive integer"));
        }
        Ok(Self {
            t0,
            dt,
            steps: steps as usize,
        })
    }

    pub fn time(&self, node: usize) -> f64 {
        self.t0 + node as f64 * self.dt
    }

    pub fn tf(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }
}

/// Second-order expansion of a running cost in `(x, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostExpansion {
    pub value: f64,
    pub l_x: Vector,
    pub l_u: Vector,
    pub l_xx: Matrix,
    pub l_ux: Matrix,
    pub l_uu: Matrix,
}

impl CostExpansion {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            value: 0.0,
            l_x: Vector::zeros(n),
            l_u: Vector::zeros(m),
            l_xx: Matrix::zeros(n, n),
            l_ux: Matrix::zeros(m, n),
            l_uu: Matrix::zeros(m, m),
        }
    }
}

/// Path-constraint values with first derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintJacobian {
    pub value: Vector,
    pub c_x: Matrix,
    pub c_u: Matrix,
}

/// A fixed-final-time optimal control problem
/// `min phi(x(tf)) + int L dt` s.t. `xdot = f`, `psi(x(tf)) = 0`,
/// `g(x, u) <= 0`, `h(x, u) = 0`.
///
/// Cost and constraint callbacks are fallible so that problems built on
/// kinematics can surface singular configurations.
pub trait Problem {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn horizon(&self) -> Horizon;

    fn terminal_dim(&self) -> usize {
        0
    }
    fn inequality_dim(&self) -> usize {
        0
    }
    fn equality_dim(&self) -> usize {
        0
    }

    fn dynamics(&self, x: &Vector, u: &Vector, t: f64) -> Vector;
    /// `(f_x, f_u)`.
    fn dynamics_jacobians(&self, x: &Vector, u: &Vector, t: f64) -> (Matrix, Matrix);

    fn running_cost(&self, x: &Vector, u: &Vector, t: f64) -> Result<f64>;
    fn running_cost_expansion(&self, x: &Vector, u: &Vector, t: f64) -> Result<CostExpansion>;

    /// `(phi, phi_x, phi_xx)`.
    fn terminal_cost(&self, x: &Vector) -> (f64, Vector, Matrix) {
        let n = x.len();
        (0.0, Vector::zeros(n), Matrix::zeros(n, n))
    }

    fn terminal_constraint(&self, _x: &Vector) -> Vector {
        Vector::zeros(0)
    }
    /// `psi_x`, `d x n`.
    fn terminal_constraint_jacobian(&self, x: &Vector) -> Matrix {
        Matrix::zeros(0, x.len())
    }
    /// One `n x n` Hessian per terminal-constraint component.
    fn terminal_constraint_hessians(&self, x: &Vector) -> Vec<Matrix> {
        vec![Matrix::zeros(x.len(), x.len()); self.terminal_dim()]
    }

    fn inequality(&self, _x: &Vector, _u: &Vector, _t: f64) -> Result<Vector> {
        Ok(Vector::zeros(0))
    }
    fn inequality_jacobian(&self, x: &Vector, u: &Vector, _t: f64) -> Result<ConstraintJacobian> {
        Ok(ConstraintJacobian {
            value: Vector::zeros(0),
            c_x: Matrix::zeros(0, x.len()),
            c_u: Matrix::zeros(0, u.len()),
        })
    }
    fn equality(&self, _x: &Vector, _u: &Vector, _t: f64) -> Result<Vector> {
        Ok(Vector::zeros(0))
    }
    fn equality_jacobian(&self, x: &Vector, u: &Vector, _t: f64) -> Result<ConstraintJacobian> {
        Ok(ConstraintJacobian {
            value: Vector::zeros(0),
            c_x: Matrix::zeros(0, x.len()),
            c_u: Matrix::zeros(0, u.len()),
        })
    }

    /// Called with the current nominal trajectory before each outer iteration.
    fn refresh(&mut self, _xs: &[Vector], _us: &[Vector]) -> Result<()> {
        Ok(())
    }
}
