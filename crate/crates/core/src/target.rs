//! Great-circle ground strip on a spherical Earth.

use nalgebra::Matrix3;

use crate::astro::{earth_rotation_dcm, EarthModel, Epoch, Vec3};
use crate::error::{Error, Result};

/// Endpoints closer to parallel than this (on unit vectors) are rejected.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;
/// Allowed distance of an endpoint from the sphere, m.
pub const SPHERE_TOLERANCE: f64 = 1.0;

/// Strip frame axes (Earth-fixed coordinates) and total arc angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetCurve {
    /// Radial direction of the strip start.
    pub x_axis: Vec3,
    /// Along-strip direction at the start.
    pub y_axis: Vec3,
    /// Great-circle pole.
    pub z_axis: Vec3,
    /// Terminal arc angle, rad.
    pub arc_length: f64,
    pub radius: f64,
}

/// Arc angle along the strip and its first three time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScanState {
    pub s: f64,
    pub sdot: f64,
    pub sddot: f64,
    pub sdddot: f64,
}

impl ScanState {
    /// Uniform scan at `rate` (zero-order-hold control).
    pub fn held(s: f64, rate: f64) -> Self {
        Self {
            s,
            sdot: rate,
            sddot: 0.0,
            sdddot: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.s.is_finite() && self.sdot.is_finite() && self.sddot.is_finite() && self.sdddot.is_finite()
    }
}

/// Ground target position and derivatives, all resolved in inertial axes.
///
/// `rf_*` are derivatives taken in the Earth-fixed frame; `velocity`,
/// `acceleration` and `jerk` are inertial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub position: Vec3,
    pub rf_dot: Vec3,
    pub rf_ddot: Vec3,
    pub rf_dddot: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub jerk: Vec3,
}

/// Builds the strip frame from its Earth-fixed endpoints.
pub fn build_curve(start: &Vec3, end: &Vec3, radius: f64) -> Result<TargetCurve> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::validation("sphere radius must be positive"));
    }
    for (name, p) in [("start", start), ("end", end)] {
        if !p.iter().all(|c| c.is_finite()) {
            return Err(Error::validation(format!("strip {name} point is not finite")));
        }
        if (p.norm() - radius).abs() > SPHERE_TOLERANCE {
            return Err(Error::validation(format!(
                "strip {name} point is {:.3} m off the sphere",
                p.norm() - radius
            )));
        }
    }
    let a = start.normalize();
    let b = end.normalize();
    let pole = a.cross(&b);
    if pole.norm() < DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateGeometry(
            "strip endpoints are identical or antipodal".into(),
        ));
    }
    let z_axis = pole.normalize();
    let y_axis = z_axis.cross(&a);
    let arc_length = a.dot(&b).clamp(-1.0, 1.0).acos();
    Ok(TargetCurve {
        x_axis: a,
        y_axis,
        z_axis,
        arc_length,
        radius,
    })
}

impl TargetCurve {
    /// Earth-fixed position at arc angle `s`.
    pub fn point(&self, s: f64) -> Vec3 {
        self.radius * (s.cos() * self.x_axis + s.sin() * self.y_axis)
    }

    /// Earth-fixed derivatives (position, first, second, third) for a scan state.
    pub fn fixed_frame_kinematics(&self, scan: &ScanState) -> [Vec3; 4] {
        let (sn, cs) = scan.s.sin_cos();
        let tangent = -sn * self.x_axis + cs * self.y_axis;
        let radial = cs * self.x_axis + sn * self.y_axis;
        let r = self.radius;
        let (v, a, j) = (scan.sdot, scan.sddot, scan.sdddot);
        [
            r * radial,
            r * v * tangent,
            r * a * tangent - r * v * v * radial,
            r * (j - v * v * v) * tangent - 3.0 * r * v * a * radial,
        ]
    }

    pub fn eval(&self, scan: &ScanState, epoch: Epoch, earth: &EarthModel) -> Result<TargetState> {
        if !scan.is_finite() || !epoch.is_finite() {
            return Err(Error::validation("non-finite scan state or epoch"));
        }
        let c: Matrix3<f64> = earth_rotation_dcm(earth, epoch);
        let [p, p1, p2, p3] = self.fixed_frame_kinematics(scan);
        let (r, rf1, rf2, rf3) = (c * p, c * p1, c * p2, c * p3);
        let w = earth.rotation_vector();
        let velocity = rf1 + w.cross(&r);
        let acceleration = rf2 + 2.0 * w.cross(&rf1) + w.cross(&w.cross(&r));
        // Earth-fixed derivative of the acceleration, transported once more.
        let jerk = rf3 + 2.0 * w.cross(&rf2) + w.cross(&w.cross(&rf1)) + w.cross(&acceleration);
        Ok(TargetState {
            position: r,
            rf_dot: rf1,
            rf_ddot: rf2,
            rf_dddot: rf3,
            velocity,
            acceleration,
            jerk,
        })
    }
}
