use serde::{Deserialize, Serialize};

use super::scenario::StripScenario;
use crate::astro::Vec3;
use crate::ddp::{ConstraintJacobian, CostExpansion, Horizon, Matrix, Problem, Vector};
use crate::error::{Error, Result};

/// Converts squared rates from (rad/s)^2 to (deg/s)^2.
pub const DEG2: f64 = (180.0 / std::f64::consts::PI) * (180.0 / std::f64::consts::PI);

/// Central-difference step in `s` for first derivatives, rad.
pub const GRAD_STEP_S: f64 = 1e-7;
/// Relative and absolute floor of the step in `u` for first derivatives.
pub const GRAD_STEP_U_REL: f64 = 1e-6;
pub const GRAD_STEP_U_MIN: f64 = 1e-9;
/// Steps for second derivatives.
pub const HESS_STEP_S: f64 = 1e-4;
pub const HESS_STEP_U_REL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// `int |omega|^2 dt`, in (deg/s)^2 s.
    MinIntegral,
    /// Nested-exponential surrogate of `max |omega|`.
    MinMax,
}

/// Sharpness `N` and normalization `M` of `L = exp(exp(N |omega|)) / M`.
///
/// `N` is reset before every outer iteration so that `N * peak = sharpness`
/// for the current peak rate, and `ln M = exp(sharpness)`, which pins
/// `L = 1` at the peak. `L` is evaluated as `exp(exp(N w) - ln M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftmaxSchedule {
    pub sharpness: f64,
    pub n: f64,
    pub log_m: f64,
}

impl SoftmaxSchedule {
    /// Largest admissible `N * peak`.
    pub const MAX_SHARPNESS: f64 = 30.0;

    pub fn new(sharpness: f64) -> Result<Self> {
        if !(sharpness.is_finite() && sharpness > 0.0 && sharpness <= Self::MAX_SHARPNESS) {
            return Err(Error::validation(format!(
                "softmax sharpness must lie in (0, {}]",
                Self::MAX_SHARPNESS
            )));
        }
        Ok(Self {
            sharpness,
            n: 1.0,
            log_m: 1f64.exp(),
        })
    }

    /// Rescales `N` and `M` to the peak rate of the previous iterate.
    pub fn update(&mut self, peak_rate: f64) -> Result<()> {
        if !(peak_rate.is_finite() && peak_rate > 0.0) {
            return Err(Error::validation("peak rate must be positive and finite"));
        }
        self.n = self.sharpness / peak_rate;
        self.log_m = self.sharpness.exp();
        Ok(())
    }

    pub fn value(&self, rate: f64) -> f64 {
        ((self.n * rate).exp() - self.log_m).exp()
    }

    /// `(L, dL/dw, d2L/dw2)`.
    pub fn derivatives(&self, rate: f64) -> (f64, f64, f64) {
        let e = (self.n * rate).exp();
        let l = (e - self.log_m).exp();
        let d1 = l * e * self.n;
        (l, d1, d1 * self.n * (1.0 + e))
    }
}

/// Value and first/second partials of `omega(s, u)` at fixed `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateJet {
    pub w: Vec3,
    pub w_s: Vec3,
    pub w_u: Vec3,
    pub w_ss: Vec3,
    pub w_su: Vec3,
    pub w_uu: Vec3,
}

fn grad_step_u(u: f64) -> f64 {
    (GRAD_STEP_U_REL * u.abs()).max(GRAD_STEP_U_MIN)
}

fn hess_step_u(u: f64) -> f64 {
    (HESS_STEP_U_REL * u.abs()).max(1e3 * GRAD_STEP_U_MIN)
}

/// Central-difference jet of the desired-frame rate.
pub fn rate_jet(scenario: &StripScenario, s: f64, u: f64, t: f64) -> Result<RateJet> {
    let w = |ds: f64, du: f64| scenario.rate(s + ds, u + du, t);
    let w0 = w(0.0, 0.0)?;
    let (hs, hu) = (GRAD_STEP_S, grad_step_u(u));
    let w_s = (w(hs, 0.0)? - w(-hs, 0.0)?) / (2.0 * hs);
    let w_u = (w(0.0, hu)? - w(0.0, -hu)?) / (2.0 * hu);
    let (hs, hu) = (HESS_STEP_S, hess_step_u(u));
    let w_ss = (w(hs, 0.0)? - 2.0 * w0 + w(-hs, 0.0)?) / (hs * hs);
    let w_uu = (w(0.0, hu)? - 2.0 * w0 + w(0.0, -hu)?) / (hu * hu);
    let w_su = (w(hs, hu)? - w(hs, -hu)? - w(-hs, hu)? + w(-hs, -hu)?) / (4.0 * hs * hu);
    Ok(RateJet {
        w: w0,
        w_s,
        w_u,
        w_ss,
        w_su,
        w_uu,
    })
}

/// Scan-rate optimization for one strip: state `s`, control `u = s_dot`,
/// terminal constraint `s(tf) = s_f` and optional line-rate bounds.
#[derive(Debug, Clone)]
pub struct StripProblem<'a> {
    pub scenario: &'a StripScenario,
    pub objective: Objective,
    pub schedule: Option<SoftmaxSchedule>,
    pub constrained: bool,
    /// Keep the curvature of `omega(s, u)` in the cost Hessian; when false the
    /// Hessian is the positive semidefinite Gauss-Newton part.
    pub exact_hessian: bool,
}

/// Minimum-integral problem.
pub fn build_min_integral(scenario: &StripScenario, constrained: bool) -> Result<StripProblem<'_>> {
    StripProblem::new(scenario, Objective::MinIntegral, None, constrained)
}

/// Min-max problem with the nested-exponential surrogate.
pub fn build_minmax(scenario: &StripScenario, schedule: SoftmaxSchedule, constrained: bool) -> Result<StripProblem<'_>> {
    StripProblem::new(scenario, Objective::MinMax, Some(schedule), constrained)
}

impl<'a> StripProblem<'a> {
    pub fn new(
        scenario: &'a StripScenario,
        objective: Objective,
        schedule: Option<SoftmaxSchedule>,
        constrained: bool,
    ) -> Result<Self> {
        if objective == Objective::MinMax && schedule.is_none() {
            return Err(Error::validation("min-max objective requires a softmax schedule"));
        }
        if constrained {
            let c = &scenario.camera;
            if !(c.f_lower > 0.0 && c.f_upper.is_finite()) {
                return Err(Error::validation(
                    "line-rate constraints need finite, positive lower and upper bounds",
                ));
            }
        }
        Ok(Self {
            scenario,
            objective,
            schedule,
            constrained,
            exact_hessian: false,
        })
    }

    /// Reference line rate used to normalize the bounds, Hz.
    pub fn line_rate_scale(&self) -> f64 {
        super::profile::line_rate_scale(&self.scenario.camera)
    }

    /// Running cost as a function of the rate vector.
    pub fn cost_of_rate(&self, w: &Vec3) -> f64 {
        match (self.objective, &self.schedule) {
            (Objective::MinMax, Some(sch)) => sch.value(w.norm()),
            _ => DEG2 * w.norm_squared(),
        }
    }

    /// `(L, L_s, L_u, L_ss, L_su, L_uu)` from a rate jet.
    pub fn cost_jet(&self, j: &RateJet) -> [f64; 6] {
        let mut j = *j;
        if !self.exact_hessian {
            j.w_ss = Vec3::zeros();
            j.w_su = Vec3::zeros();
            j.w_uu = Vec3::zeros();
        }
        let j = &j;
        match (self.objective, &self.schedule) {
            (Objective::MinMax, Some(sch)) => {
                let n = j.w.norm();
                let n_s = j.w.dot(&j.w_s) / n;
                let n_u = j.w.dot(&j.w_u) / n;
                let n_ss = (j.w_s.norm_squared() + j.w.dot(&j.w_ss) - n_s * n_s) / n;
                let n_su = (j.w_s.dot(&j.w_u) + j.w.dot(&j.w_su) - n_s * n_u) / n;
                let n_uu = (j.w_u.norm_squared() + j.w.dot(&j.w_uu) - n_u * n_u) / n;
                let (l, d1, d2) = sch.derivatives(n);
                [
                    l,
                    d1 * n_s,
                    d1 * n_u,
                    d2 * n_s * n_s + d1 * n_ss,
                    d2 * n_s * n_u + d1 * n_su,
                    d2 * n_u * n_u + d1 * n_uu,
                ]
            }
            _ => {
                let c = 2.0 * DEG2;
                [
                    DEG2 * j.w.norm_squared(),
                    c * j.w.dot(&j.w_s),
                    c * j.w.dot(&j.w_u),
                    c * (j.w_s.norm_squared() + j.w.dot(&j.w_ss)),
                    c * (j.w_s.dot(&j.w_u) + j.w.dot(&j.w_su)),
                    c * (j.w_u.norm_squared() + j.w.dot(&j.w_uu)),
                ]
            }
        }
    }

    fn bounds(&self, f: f64) -> Vector {
        let c = &self.scenario.camera;
        let scale = self.line_rate_scale();
        Vector::from_vec(vec![(c.f_lower - f) / scale, (f - c.f_upper) / scale])
    }

    /// Rate magnitudes at the points where the running cost is sampled.
    pub fn sampled_rates(&self, xs: &[Vector], us: &[Vector]) -> Result<Vec<f64>> {
        let h = self.scenario.horizon;
        let mut rates = Vec::with_capacity(3 * us.len());
        for (k, u) in us.iter().enumerate() {
            let (s0, s1, t) = (xs[k][0], xs[k + 1][0], h.time(k));
            for (s, tt) in [(s0, t), (0.5 * (s0 + s1), t + 0.5 * h.dt), (s1, t + h.dt)] {
                rates.push(self.scenario.rate(s, u[0], tt)?.norm());
            }
        }
        Ok(rates)
    }
}

impl Problem for StripProblem<'_> {
    fn state_dim(&self) -> usize {
        1
    }
    fn control_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> Horizon {
        self.scenario.horizon
    }
    fn terminal_dim(&self) -> usize {
        1
    }
    fn inequality_dim(&self) -> usize {
        if self.constrained {
            2
        } else {
            0
        }
    }

    fn dynamics(&self, _x: &Vector, u: &Vector, _t: f64) -> Vector {
        u.clone()
    }
    fn dynamics_jacobians(&self, _x: &Vector, _u: &Vector, _t: f64) -> (Matrix, Matrix) {
        (Matrix::zeros(1, 1), Matrix::from_element(1, 1, 1.0))
    }

    fn running_cost(&self, x: &Vector, u: &Vector, t: f64) -> Result<f64> {
        Ok(self.cost_of_rate(&self.scenario.rate(x[0], u[0], t)?))
    }

    fn running_cost_expansion(&self, x: &Vector, u: &Vector, t: f64) -> Result<CostExpansion> {
        let jet = rate_jet(self.scenario, x[0], u[0], t)?;
        let [l, l_s, l_u, l_ss, l_su, l_uu] = self.cost_jet(&jet);
        Ok(CostExpansion {
            value: l,
            l_x: Vector::from_element(1, l_s),
            l_u: Vector::from_element(1, l_u),
            l_xx: Matrix::from_element(1, 1, l_ss),
            l_ux: Matrix::from_element(1, 1, l_su),
            l_uu: Matrix::from_element(1, 1, l_uu),
        })
    }

    fn terminal_constraint(&self, x: &Vector) -> Vector {
        Vector::from_element(1, x[0] - self.scenario.arc_length())
    }
    fn terminal_constraint_jacobian(&self, _x: &Vector) -> Matrix {
        Matrix::from_element(1, 1, 1.0)
    }

    fn inequality(&self, x: &Vector, u: &Vector, t: f64) -> Result<Vector> {
        if !self.constrained {
            return Ok(Vector::zeros(0));
        }
        Ok(self.bounds(self.scenario.sample(x[0], u[0], t)?.f_ccd))
    }

    fn inequality_jacobian(&self, x: &Vector, u: &Vector, t: f64) -> Result<ConstraintJacobian> {
        if !self.constrained {
            return Ok(ConstraintJacobian {
                value: Vector::zeros(0),
                c_x: Matrix::zeros(0, 1),
                c_u: Matrix::zeros(0, 1),
            });
        }
        let (s, v) = (x[0], u[0]);
        let f = |ds: f64, du: f64| Ok::<f64, Error>(self.scenario.sample(s + ds, v + du, t)?.f_ccd);
        let (hs, hu) = (GRAD_STEP_S, grad_step_u(v));
        let f_s = (f(hs, 0.0)? - f(-hs, 0.0)?) / (2.0 * hs);
        let f_u = (f(0.0, hu)? - f(0.0, -hu)?) / (2.0 * hu);
        let scale = self.line_rate_scale();
        Ok(ConstraintJacobian {
            value: self.bounds(f(0.0, 0.0)?),
            c_x: Matrix::from_column_slice(2, 1, &[-f_s / scale, f_s / scale]),
            c_u: Matrix::from_column_slice(2, 1, &[-f_u / scale, f_u / scale]),
        })
    }

    fn refresh(&mut self, xs: &[Vector], us: &[Vector]) -> Result<()> {
        if self.objective != Objective::MinMax {
            return Ok(());
        }
        let peak = self.sampled_rates(xs, us)?.into_iter().fold(0.0, f64::max);
        if let Some(sch) = self.schedule.as_mut() {
            sch.update(peak)?;
        }
        Ok(())
    }
}
