use super::{stage_expansion, AlState, Matrix, Problem, Trajectory, Vector};
use crate::error::{Error, Result};

/// Second-order value expansion in `(x, nu)` at one grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNode {
    pub v_x: Vector,
    pub v_nu: Vector,
    pub v_xx: Matrix,
    pub v_xnu: Matrix,
    pub v_nunu: Matrix,
}

/// Feedback law `du = beta_u + beta_x dx + beta_nu dnu` on one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    pub beta_u: Vector,
    pub beta_x: Matrix,
    pub beta_nu: Matrix,
}

/// Diagonal shift applied to `Q_uu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub initial: f64,
    pub factor: f64,
    pub max: f64,
}

impl Default for Regularization {
    fn default() -> Self {
        Self {
            initial: 1e-8,
            factor: 10.0,
            max: 1e2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `N + 1` nodes; `values[0]` is at `t0`.
    pub values: Vec<ValueNode>,
    /// `N` intervals.
    pub gains: Vec<Gains>,
    /// Predicted change of the merit for a full step, `sum Q_u' beta_u + beta_u' Q_uu beta_u / 2`.
    pub expected_reduction: f64,
    /// Largest diagonal shift used (0 when none was needed).
    pub max_regularization: f64,
}

impl SweepResult {
    pub fn initial(&self) -> &ValueNode {
        &self.values[0]
    }

    /// Largest `|A - A'|` entry over all `V_xx` and `V_nunu`.
    pub fn symmetry_error(&self) -> f64 {
        let asym = |a: &Matrix| (a - a.transpose()).amax();
        self.values
            .iter()
            .map(|v| asym(&v.v_xx).max(asym(&v.v_nunu)))
            .fold(0.0, f64::max)
    }
}

/// Factorizes `Q_uu + delta I`, escalating `delta` until it is positive definite.
fn regularized_inverse(q_uu: &Matrix, reg: &Regularization, node: usize) -> Result<(Matrix, f64)> {
    let m = q_uu.nrows();
    let mut delta = 0.0;
    loop {
        let shifted = q_uu + Matrix::identity(m, m) * delta;
        if let Some(chol) = shifted.cholesky() {
            return Ok((chol.inverse(), delta));
        }
        delta = if delta == 0.0 { reg.initial } else { delta * reg.factor };
        if delta > reg.max * (1.0 + 1e-12) {
            return Err(Error::SweepFailure {
                node,
                regularization: delta / reg.factor,
            });
        }
    }
}

/// Backward pass over the nominal trajectory with terminal multiplier `nu`.
pub fn backward_sweep<P: Problem + ?Sized>(
    problem: &P,
    traj: &Trajectory,
    nu: &Vector,
    al: &AlState,
    reg: &Regularization,
) -> Result<SweepResult> {
    let (n, d) = (problem.state_dim(), problem.terminal_dim());
    let steps = traj.horizon.steps;
    let x_n = traj.final_state();

    let (_, phi_x, phi_xx) = problem.terminal_cost(x_n);
    let psi = problem.terminal_constraint(x_n);
    let psi_x = problem.terminal_constraint_jacobian(x_n);
    let mut v_xx = phi_xx;
    for (i, hess) in problem.terminal_constraint_hessians(x_n).iter().enumerate() {
        v_xx += nu[i] * hess;
    }
    let mut value = ValueNode {
        v_x: phi_x + psi_x.transpose() * nu,
        v_nu: psi,
        v_xx,
        v_xnu: psi_x.transpose(),
        v_nunu: Matrix::zeros(d, d),
    };

    let mut values = vec![value.clone()];
    let mut gains = Vec::with_capacity(steps);
    let mut expected_reduction = 0.0;
    let mut max_regularization: f64 = 0.0;

    for k in (0..steps).rev() {
        let e = stage_expansion(problem, traj, k, al)?;
        let fx_t = e.f_x.transpose();
        let fu_t = e.f_u.transpose();
        let vxx_fx = &value.v_xx * &e.f_x;

        let q_x = &e.l_x + &fx_t * &value.v_x;
        let q_u = &e.l_u + &fu_t * &value.v_x;
        let q_xx = &e.l_xx + &fx_t * &vxx_fx;
        let q_ux = &e.l_ux + &fu_t * &vxx_fx;
        let q_uu = &e.l_uu + &fu_t * &value.v_xx * &e.f_u;
        let q_xnu = &fx_t * &value.v_xnu;
        let q_unu = &fu_t * &value.v_xnu;

        let (inv, delta) = regularized_inverse(&q_uu, reg, k)?;
        max_regularization = max_regularization.max(delta);
        let beta_u = -(&inv * &q_u);
        let beta_x = -(&inv * &q_ux);
        let beta_nu = -(&inv * &q_unu);

        let q_ux_t = q_ux.transpose();
        let q_unu_t = q_unu.transpose();
        let bx_t = beta_x.transpose();
        let bnu_t = beta_nu.transpose();
        let uu_bu = &q_uu * &beta_u;
        let uu_bx = &q_uu * &beta_x;
        let uu_bnu = &q_uu * &beta_nu;

        expected_reduction += q_u.dot(&beta_u) + 0.5 * beta_u.dot(&uu_bu);
        value = ValueNode {
            v_x: q_x + &bx_t * &q_u + &q_ux_t * &beta_u + &bx_t * &uu_bu,
            v_nu: &value.v_nu + &bnu_t * &q_u + &q_unu_t * &beta_u + &bnu_t * &uu_bu,
            v_xx: q_xx + &bx_t * &q_ux + &q_ux_t * &beta_x + &bx_t * &uu_bx,
            v_xnu: q_xnu + &bx_t * &q_unu + &q_ux_t * &beta_nu + &bx_t * &uu_bnu,
            v_nunu: &value.v_nunu + &bnu_t * &q_unu + &q_unu_t * &beta_nu + &bnu_t * &uu_bnu,
        };
        if !value.v_xx.iter().chain(value.v_x.iter()).all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k });
        }
        values.push(value.clone());
        gains.push(Gains {
            beta_u,
            beta_x,
            beta_nu,
        });
    }
    values.reverse();
    gains.reverse();
    debug_assert_eq!(values.len(), steps + 1);
    debug_assert_eq!(values[0].v_x.len(), n);
    Ok(SweepResult {
        values,
        gains,
        expected_reduction,
        max_regularization,
    })
}
