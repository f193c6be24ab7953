use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};

use super::problem::DEG2;
use super::scenario::StripScenario;
use crate::astro::Vec3;
use crate::attitude::{self, CameraParams, Dcm};
use crate::error::{Error, Result};
use crate::target::ScanState;

/// Normalization of line-rate bound violations, Hz.
pub fn line_rate_scale(camera: &CameraParams) -> f64 {
    if camera.f_upper.is_finite() {
        0.5 * (camera.f_lower + camera.f_upper)
    } else {
        camera.f_lower.max(f64::MIN_POSITIVE)
    }
}

/// Attitude command and scan quantities at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileNode {
    pub t: f64,
    pub s: f64,
    pub u: f64,
    pub dcm: Dcm,
    /// Scalar-first `(w, x, y, z)`.
    pub quaternion: [f64; 4],
    /// rad/s, inertial axes.
    pub omega: Vec3,
    /// rad/s^2, inertial axes.
    pub alpha: Vec3,
    pub f_ccd: f64,
    pub v_los: f64,
    /// rad.
    pub drift: f64,
}

/// Table-1 style metrics of a scan profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetrics {
    /// `int |omega|^2 dt`, (deg/s)^2 s.
    pub integral_rate_sq: f64,
    /// deg/s.
    pub max_rate: f64,
    /// `|s(tf) - s_f|`, rad.
    pub terminal_error: f64,
    /// `max(f_lower - f, f - f_upper) / scale` over nodes; `None` without bounds.
    pub bound_violation: Option<f64>,
    pub min_f_ccd: f64,
    pub max_f_ccd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub nodes: Vec<ProfileNode>,
    pub metrics: ProfileMetrics,
}

impl ProfileReport {
    /// Rate magnitudes at the nodes, deg/s.
    pub fn rate_norms_deg(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.omega.norm().to_degrees()).collect()
    }

    pub fn bounds_satisfied(&self, tolerance: f64) -> bool {
        self.metrics.bound_violation.is_none_or(|v| v <= tolerance)
    }
}

/// `(int |omega|^2 dt, max |omega|)` in (deg/s)^2 s and deg/s for a
/// zero-order-hold scan.
///
/// The integral uses the solver's quadrature (the RK4 stage points of every
/// interval, with `s` advanced exactly under the held control); the maximum
/// is taken over both one-sided node values.
pub fn zoh_rate_metrics(scenario: &StripScenario, s: &[f64], u: &[f64]) -> Result<(f64, f64)> {
    let h = scenario.horizon;
    let dt = h.dt;
    let mut integral = 0.0;
    let mut max_rate: f64 = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        let t = h.time(k);
        let mut stage = [0.0; 3];
        for (i, c) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            stage[i] = scenario.rate(s[k] + c * dt * uk, uk, t + c * dt)?.norm();
        }
        integral += dt / 6.0 * DEG2 * (stage[0].powi(2) + 4.0 * stage[1].powi(2) + stage[2].powi(2));
        max_rate = max_rate.max(stage[0]).max(stage[2]);
    }
    Ok((integral, max_rate.to_degrees()))
}

/// Evaluates a zero-order-hold scan: `s` on the `N + 1` nodes, `u` on the
/// `N` intervals.
///
/// Metrics follow [`zoh_rate_metrics`]. Node rates use the interval control to the right (the last node the one to the
/// left); node accelerations use `s_ddot`, `s_dddot` from central
/// differences of the node controls.
pub fn evaluate_profile(scenario: &StripScenario, s: &[f64], u: &[f64]) -> Result<ProfileReport> {
    let h = scenario.horizon;
    if !(scenario.arc_length() > 0.0) {
        return Err(Error::DegenerateGeometry("zero-length strip".into()));
    }
    if s.len() != h.nodes() || u.len() != h.steps {
        return Err(Error::validation(format!(
            "profile needs {} states and {} controls, got {} and {}",
            h.nodes(),
            h.steps,
            s.len(),
            u.len()
        )));
    }
    if !s.iter().chain(u.iter()).all(|v| v.is_finite()) {
        return Err(Error::validation("profile contains non-finite values"));
    }

    let dt = h.dt;
    let (integral, max_rate) = zoh_rate_metrics(scenario, s, u)?;

    let node_u: Vec<f64> = (0..h.nodes()).map(|k| u[k.min(h.steps - 1)]).collect();
    let n = node_u.len();
    // First and second differences of the node controls, one-sided at the ends.
    let derivative = |k: usize| -> (f64, f64) {
        if n < 3 {
            return (0.0, 0.0);
        }
        let first = match k {
            0 => (node_u[1] - node_u[0]) / dt,
            _ if k == n - 1 => (node_u[n - 1] - node_u[n - 2]) / dt,
            _ => (node_u[k + 1] - node_u[k - 1]) / (2.0 * dt),
        };
        let c = k.clamp(1, n - 2);
        let second = (node_u[c + 1] - 2.0 * node_u[c] + node_u[c - 1]) / (dt * dt);
        (first, second)
    };

    let scale = line_rate_scale(&scenario.camera);
    let bounded = scenario.has_line_rate_bounds();
    let mut violation = f64::NEG_INFINITY;
    let mut nodes = Vec::with_capacity(n);
    for k in 0..n {
        let t = h.time(k);
        let (sddot, sdddot) = derivative(k);
        let scan = ScanState {
            s: s[k],
            sdot: node_u[k],
            sddot,
            sdddot,
        };
        let sat = scenario.satellite(t)?;
        let tgt = scenario.target(&scan, t)?;
        let cmd = attitude::command(&sat, &tgt, &scenario.earth, &scenario.camera)?;
        let los = attitude::los_state(&sat, &tgt)?;
        let relative = cmd.dcm * attitude::relative_ground_motion(&los, &tgt, &cmd.dcm);
        let drift = attitude::drift_angle(&relative)?;
        let q = UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(cmd.dcm));
        let f = cmd.metrics.f_ccd;
        if bounded {
            let v = (scenario.camera.f_lower - f).max(f - scenario.camera.f_upper) / scale;
            violation = violation.max(v);
        }
        nodes.push(ProfileNode {
            t,
            s: s[k],
            u: node_u[k],
            dcm: cmd.dcm,
            quaternion: [q.w, q.i, q.j, q.k],
            omega: cmd.omega,
            alpha: cmd.alpha,
            f_ccd: f,
            v_los: cmd.metrics.v_los,
            drift,
        });
    }
    let f_values = nodes.iter().map(|n| n.f_ccd);
    let metrics = ProfileMetrics {
        integral_rate_sq: integral,
        max_rate,
        terminal_error: (s[h.steps] - scenario.arc_length()).abs(),
        bound_violation: bounded.then_some(violation),
        min_f_ccd: f_values.clone().fold(f64::INFINITY, f64::min),
        max_f_ccd: f_values.fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(ProfileReport { nodes, metrics })
}
