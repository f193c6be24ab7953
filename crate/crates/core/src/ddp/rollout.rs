use super::{AlState, Horizon, Matrix, Problem, Vector};
use crate::error::{Error, Result};

const RK4_WEIGHTS: [f64; 4] = [1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0];
const RK4_OFFSETS: [f64; 4] = [0.0, 0.5, 0.5, 1.0];

/// States at the grid nodes and the zero-order-hold controls between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub horizon: Horizon,
    /// `N + 1` states.
    pub xs: Vec<Vector>,
    /// `N` controls; `us[k]` holds over `[t_k, t_{k+1})`.
    pub us: Vec<Vector>,
}

impl Trajectory {
    /// Control applied at node `k`; the last node reuses the final interval's control.
    pub fn control_at_node(&self, node: usize) -> &Vector {
        &self.us[node.min(self.us.len() - 1)]
    }

    pub fn final_state(&self) -> &Vector {
        self.xs.last().expect("trajectory has at least one node")
    }
}

/// Running-cost, penalty and constraint summary of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEval {
    /// Integral of the running cost.
    pub running: f64,
    pub terminal: f64,
    /// Augmented-Lagrangian path penalty.
    pub penalty: f64,
    pub psi: Vector,
    /// Inequality values, `p x (N + 1)`.
    pub g: Matrix,
    /// Equality values, `q x (N + 1)`.
    pub h: Matrix,
}

impl TrajectoryEval {
    /// Unaugmented objective.
    pub fn cost(&self) -> f64 {
        self.running + self.terminal
    }

    /// Augmented cost with terminal multiplier `nu`.
    pub fn merit(&self, nu: &Vector) -> f64 {
        self.running + self.terminal + self.penalty + nu.dot(&self.psi)
    }

    pub fn psi_norm(&self) -> f64 {
        self.psi.amax()
    }

    /// Largest inequality value (`-inf` without inequalities).
    pub fn max_g(&self) -> f64 {
        self.g.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub(super) fn rk4_step<P: Problem + ?Sized>(problem: &P, x: &Vector, u: &Vector, t: f64, dt: f64) -> (Vector, [Vector; 4]) {
    let k1 = problem.dynamics(x, u, t);
    let x2 = x + 0.5 * dt * &k1;
    let k2 = problem.dynamics(&x2, u, t + 0.5 * dt);
    let x3 = x + 0.5 * dt * &k2;
    let k3 = problem.dynamics(&x3, u, t + 0.5 * dt);
    let x4 = x + dt * &k3;
    let k4 = problem.dynamics(&x4, u, t + dt);
    let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    (next, [x.clone(), x2, x3, x4])
}

/// Integrates the dynamics under zero-order-hold controls.
pub fn forward_rollout<P: Problem + ?Sized>(problem: &P, us: &[Vector], x0: &Vector) -> Result<Trajectory> {
    let horizon = problem.horizon();
    if us.len() != horizon.steps {
        return Err(Error::validation(format!(
            "expected {} controls, got {}",
            horizon.steps,
            us.len()
        )));
    }
    let mut xs = Vec::with_capacity(horizon.nodes());
    xs.push(x0.clone());
    for (k, u) in us.iter().enumerate() {
        let (next, _) = rk4_step(problem, &xs[k], u, horizon.time(k), horizon.dt);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k + 1 });
        }
        xs.push(next);
    }
    Ok(Trajectory {
        horizon,
        xs,
        us: us.to_vec(),
    })
}

fn stage_running_cost<P: Problem + ?Sized>(problem: &P, x: &Vector, u: &Vector, t: f64, dt: f64) -> Result<f64> {
    let (_, stages) = rk4_step(problem, x, u, t, dt);
    let mut total = 0.0;
    for ((xi, w), c) in stages.iter().zip(RK4_WEIGHTS).zip(RK4_OFFSETS) {
        total += w * dt * problem.running_cost(xi, u, t + c * dt)?;
    }
    Ok(total)
}

/// Costs and constraint values of a trajectory under the given multipliers.
pub fn evaluate<P: Problem + ?Sized>(problem: &P, traj: &Trajectory, al: &AlState) -> Result<TrajectoryEval> {
    let horizon = traj.horizon;
    let (p, q) = (problem.inequality_dim(), problem.equality_dim());
    let mut running = 0.0;
    for k in 0..horizon.steps {
        running += stage_running_cost(problem, &traj.xs[k], &traj.us[k], horizon.time(k), horizon.dt)?;
    }
    let mut g = Matrix::zeros(p, horizon.nodes());
    let mut h = Matrix::zeros(q, horizon.nodes());
    let mut penalty = 0.0;
    for node in 0..horizon.nodes() {
        let u = traj.control_at_node(node);
        let t = horizon.time(node);
        let gv = problem.inequality(&traj.xs[node], u, t)?;
        let hv = problem.equality(&traj.xs[node], u, t)?;
        let (c, ..) = al.node_terms(node, &gv, &hv);
        penalty += horizon.dt * c;
        g.set_column(node, &gv);
        h.set_column(node, &hv);
    }
    let x_n = traj.final_state();
    let (terminal, ..) = problem.terminal_cost(x_n);
    Ok(TrajectoryEval {
        running,
        terminal,
        penalty,
        psi: problem.terminal_constraint(x_n),
        g,
        h,
    })
}

/// Augmented stage cost expansion together with the Jacobians of the
/// discrete interval map.
#[derive(Debug, Clone, PartialEq)]
pub struct StageExpansion {
    pub l_x: Vector,
    pub l_u: Vector,
    pub l_xx: Matrix,
    pub l_ux: Matrix,
    pub l_uu: Matrix,
    pub f_x: Matrix,
    pub f_u: Matrix,
}

/// Expansion of interval `k`: RK4-consistent running cost, the path penalty
/// at node `k` and, for the last interval, the penalty at the final node.
///
/// Second derivatives of the stage states are neglected (Gauss-Newton in the
/// dynamics), which is exact for dynamics linear in `(x, u)`.
pub fn stage_expansion<P: Problem + ?Sized>(
    problem: &P,
    traj: &Trajectory,
    k: usize,
    al: &AlState,
) -> Result<StageExpansion> {
    let horizon = traj.horizon;
    let (n, m) = (problem.state_dim(), problem.control_dim());
    let dt = horizon.dt;
    let t = horizon.time(k);
    let x = &traj.xs[k];
    let u = &traj.us[k];

    let mut e = StageExpansion {
        l_x: Vector::zeros(n),
        l_u: Vector::zeros(m),
        l_xx: Matrix::zeros(n, n),
        l_ux: Matrix::zeros(m, n),
        l_uu: Matrix::zeros(m, m),
        f_x: Matrix::identity(n, n),
        f_u: Matrix::zeros(n, m),
    };

    // RK4 stages with their sensitivities to (x, u).
    let mut stage_x = x.clone();
    let mut dxs_x = Matrix::identity(n, n);
    let mut dxs_u = Matrix::zeros(n, m);
    let mut dk_x_prev = Matrix::zeros(n, n);
    let mut dk_u_prev = Matrix::zeros(n, m);
    let mut k_prev = Vector::zeros(n);
    for (i, (&w, &c)) in RK4_WEIGHTS.iter().zip(RK4_OFFSETS.iter()).enumerate() {
        if i > 0 {
            stage_x = x + c * dt * &k_prev;
            dxs_x = Matrix::identity(n, n) + c * dt * &dk_x_prev;
            dxs_u = c * dt * &dk_u_prev;
        }
        let ti = t + c * dt;
        let ki = problem.dynamics(&stage_x, u, ti);
        let (a, b) = problem.dynamics_jacobians(&stage_x, u, ti);
        let dk_x = &a * &dxs_x;
        let dk_u = &a * &dxs_u + &b;

        let ce = problem.running_cost_expansion(&stage_x, u, ti)?;
        let wt = w * dt;
        e.l_x += wt * dxs_x.transpose() * &ce.l_x;
        e.l_u += wt * (dxs_u.transpose() * &ce.l_x + &ce.l_u);
        e.l_xx += wt * dxs_x.transpose() * &ce.l_xx * &dxs_x;
        e.l_ux += wt * (dxs_u.transpose() * &ce.l_xx * &dxs_x + &ce.l_ux * &dxs_x);
        let cross = dxs_u.transpose() * ce.l_ux.transpose();
        e.l_uu += wt * (dxs_u.transpose() * &ce.l_xx * &dxs_u + &cross + cross.transpose() + &ce.l_uu);

        e.f_x += w * dt * &dk_x;
        e.f_u += w * dt * &dk_u;
        k_prev = ki;
        dk_x_prev = dk_x;
        dk_u_prev = dk_u;
    }

    if problem.inequality_dim() + problem.equality_dim() > 0 {
        add_node_penalty(problem, &mut e, al, k, x, u, t, dt, None)?;
        if k + 1 == horizon.steps {
            let fx = e.f_x.clone();
            let fu = e.f_u.clone();
            add_node_penalty(problem, &mut e, al, k + 1, &traj.xs[k + 1], u, horizon.time(k + 1), dt, Some((&fx, &fu)))?;
        }
    }
    Ok(e)
}

#[allow(clippy::too_many_arguments)]
fn add_node_penalty<P: Problem + ?Sized>(
    problem: &P,
    e: &mut StageExpansion,
    al: &AlState,
    node: usize,
    x: &Vector,
    u: &Vector,
    t: f64,
    weight: f64,
    chain: Option<(&Matrix, &Matrix)>,
) -> Result<()> {
    let gj = problem.inequality_jacobian(x, u, t)?;
    let hj = problem.equality_jacobian(x, u, t)?;
    let (_, dg, ddg, dh, ddh) = al.node_terms(node, &gj.value, &hj.value);
    for (jac, d1, d2) in [(gj, dg, ddg), (hj, dh, ddh)] {
        if jac.value.is_empty() {
            continue;
        }
        // Map derivatives through x_{k+1} = F(x_k, u_k) for the final node.
        let (cx, cu) = match chain {
            Some((fx, fu)) => (&jac.c_x * fx, &jac.c_x * fu + &jac.c_u),
            None => (jac.c_x.clone(), jac.c_u.clone()),
        };
        let w2 = Matrix::from_diagonal(&d2);
        e.l_x += weight * cx.transpose() * &d1;
        e.l_u += weight * cu.transpose() * &d1;
        e.l_xx += weight * cx.transpose() * &w2 * &cx;
        e.l_ux += weight * cu.transpose() * &w2 * &cx;
        e.l_uu += weight * cu.transpose() * &w2 * &cu;
    }
    Ok(())
}
