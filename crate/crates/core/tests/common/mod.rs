#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::Matrix3;
use strip_guidance::astro::Vec3;
use strip_guidance::config::ScenarioConfig;
use strip_guidance::ddp::{ConstraintJacobian, CostExpansion, Horizon, Matrix, Problem, Vector};
use strip_guidance::ocp::StripScenario;
use strip_guidance::target::ScanState;
use strip_guidance::Result;

pub const BUNDLED: [&str; 4] = ["parallel", "offset", "perpendicular", "reverse"];

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

pub fn bundled(name: &str) -> (ScenarioConfig, StripScenario) {
    let config = ScenarioConfig::load(config_path(name)).unwrap();
    let scenario = config.build().unwrap();
    (config, scenario)
}

/// Constant-rate scan and a smooth scan with non-zero higher derivatives.
pub fn scan_profiles(scenario: &StripScenario) -> Vec<(&'static str, Box<dyn Fn(f64) -> ScanState + '_>)> {
    let sf = scenario.arc_length();
    let tf = scenario.duration();
    let w = 2.0 * std::f64::consts::PI / tf;
    let a = 0.05;
    vec![
        (
            "linear",
            Box::new(move |t: f64| ScanState {
                s: sf * t / tf,
                sdot: sf / tf,
                sddot: 0.0,
                sdddot: 0.0,
            }),
        ),
        (
            "smooth",
            Box::new(move |t: f64| ScanState {
                s: sf * (t / tf + a * (w * t).sin()),
                sdot: sf * (1.0 / tf + a * w * (w * t).cos()),
                sddot: -sf * a * w * w * (w * t).sin(),
                sdddot: -sf * a * w * w * w * (w * t).cos(),
            }),
        ),
    ]
}

/// Second-order difference quotient: central inside `[0, tf]`, one-sided at the ends.
pub fn derivative<T>(f: impl Fn(f64) -> T, t: f64, h: f64, tf: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    if t - h < 0.0 {
        (f(t + h) * 4.0 - f(t) * 3.0 - f(t + 2.0 * h)) * (0.5 / h)
    } else if t + h > tf {
        (f(t) * 3.0 - f(t - h) * 4.0 + f(t - 2.0 * h)) * (0.5 / h)
    } else {
        (f(t + h) - f(t - h)) * (0.5 / h)
    }
}

/// Angular velocity in inertial axes from `D` (rows are frame axes) and its
/// rate: `D_dot = -D [w x]`.
pub fn rate_from_dcm(d: &Matrix3<f64>, d_dot: &Matrix3<f64>) -> Vec3 {
    let omega = -d.transpose() * d_dot;
    let skew = 0.5 * (omega - omega.transpose());
    Vec3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)])
}

/// `(max |w - w_fd|, max |a - a_fd|)` over the grid nodes for one scan profile.
pub fn kinematic_errors(scenario: &StripScenario, scan: &dyn Fn(f64) -> ScanState, h: f64) -> (f64, f64) {
    let tf = scenario.duration();
    let cmd = |t: f64| scenario.command(&scan(t), t).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..scenario.horizon.nodes() {
        let t = scenario.horizon.time(k);
        let c = cmd(t);
        let d_dot = derivative(|x| cmd(x).dcm, t, h, tf);
        let w_fd = rate_from_dcm(&c.dcm, &d_dot);
        let a_fd = derivative(|x| cmd(x).omega, t, h, tf);
        worst.0 = worst.0.max((c.omega - w_fd).norm());
        worst.1 = worst.1.max((c.alpha - a_fd).norm());
    }
    worst
}

fn v1(x: f64) -> Vector {
    Vector::from_element(1, x)
}

fn m1(x: f64) -> Matrix {
    Matrix::from_element(1, 1, x)
}

/// `xdot = u`, `L = (qx x^2 + (u - uref)^2) / 2`, optional `x(T) = target`,
/// optional `u <= umax`.
pub struct Integrator {
    pub horizon: Horizon,
    pub qx: f64,
    pub uref: f64,
    pub target: Option<f64>,
    pub umax: Option<f64>,
}

impl Integrator {
    pub fn new(tf: f64, dt: f64) -> Self {
        Self {
            horizon: Horizon::new(0.0, tf, dt).unwrap(),
            qx: 0.0,
            uref: 0.0,
            target: None,
            umax: None,
        }
    }
}

impl Problem for Integrator {
    fn state_dim(&self) -> usize {
        1
    }
    fn control_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> Horizon {
        self.horizon
    }
    fn terminal_dim(&self) -> usize {
        usize::from(self.target.is_some())
    }
    fn inequality_dim(&self) -> usize {
        usize::from(self.umax.is_some())
    }
    fn dynamics(&self, _x: &Vector, u: &Vector, _t: f64) -> Vector {
        u.clone()
    }
    fn dynamics_jacobians(&self, _x: &Vector, _u: &Vector, _t: f64) -> (Matrix, Matrix) {
        (m1(0.0), m1(1.0))
    }
    fn running_cost(&self, x: &Vector, u: &Vector, _t: f64) -> Result<f64> {
        Ok(0.5 * (self.qx * x[0] * x[0] + (u[0] - self.uref).powi(2)))
    }
    fn running_cost_expansion(&self, x: &Vector, u: &Vector, t: f64) -> Result<CostExpansion> {
        Ok(CostExpansion {
            value: self.running_cost(x, u, t)?,
            l_x: v1(self.qx * x[0]),
            l_u: v1(u[0] - self.uref),
            l_xx: m1(self.qx),
            l_ux: m1(0.0),
            l_uu: m1(1.0),
        })
    }
    fn terminal_constraint(&self, x: &Vector) -> Vector {
        match self.target {
            Some(t) => v1(x[0] - t),
            None => Vector::zeros(0),
        }
    }
    fn terminal_constraint_jacobian(&self, _x: &Vector) -> Matrix {
        Matrix::from_element(self.terminal_dim(), 1, 1.0)
    }
    fn inequality(&self, _x: &Vector, u: &Vector, _t: f64) -> Result<Vector> {
        Ok(match self.umax {
            Some(b) => v1(u[0] - b),
            None => Vector::zeros(0),
        })
    }
    fn inequality_jacobian(&self, x: &Vector, u: &Vector, t: f64) -> Result<ConstraintJacobian> {
        let p = self.inequality_dim();
        Ok(ConstraintJacobian {
            value: self.inequality(x, u, t)?,
            c_x: Matrix::zeros(p, 1),
            c_u: Matrix::from_element(p, 1, 1.0),
        })
    }
}

/// Cart `[x, v]`, `xdot = v`, `vdot = u - 0.3 sin(x)`, `L = u^2 / 2`,
/// terminal constraint `x(T) = 1.2`: a multi-state problem for symmetry checks.
pub struct Pendulum {
    pub horizon: Horizon,
}

impl Problem for Pendulum {
    fn state_dim(&self) -> usize {
        2
    }
    fn control_dim(&self) -> usize {
        1
    }
    fn horizon(&self) -> Horizon {
        self.horizon
    }
    fn terminal_dim(&self) -> usize {
        1
    }
    fn dynamics(&self, x: &Vector, u: &Vector, _t: f64) -> Vector {
        Vector::from_vec(vec![x[1], u[0] - 0.3 * x[0].sin()])
    }
    fn dynamics_jacobians(&self, x: &Vector, _u: &Vector, _t: f64) -> (Matrix, Matrix) {
        (
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, -0.3 * x[0].cos(), 0.0]),
            Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
        )
    }
    fn running_cost(&self, x: &Vector, u: &Vector, _t: f64) -> Result<f64> {
        Ok(0.5 * u[0] * u[0] + 0.05 * x[1] * x[1])
    }
    fn running_cost_expansion(&self, x: &Vector, u: &Vector, t: f64) -> Result<CostExpansion> {
        Ok(CostExpansion {
            value: self.running_cost(x, u, t)?,
            l_x: Vector::from_vec(vec![0.0, 0.1 * x[1]]),
            l_u: v1(u[0]),
            l_xx: Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.1]),
            l_ux: Matrix::zeros(1, 2),
            l_uu: m1(1.0),
        })
    }
    fn terminal_constraint(&self, x: &Vector) -> Vector {
        v1(x[0] - 1.2)
    }
    fn terminal_constraint_jacobian(&self, _x: &Vector) -> Matrix {
        Matrix::from_row_slice(1, 2, &[1.0, 0.0])
    }
}
