//! Desired imaging frame, its angular rate and acceleration, and TDI line-rate
//! quantities.
//!
//! Frame convention: the direction cosine matrix maps inertial components to
//! desired-frame components, so its rows are the desired axes `x_D, y_D, z_D`
//! expressed in inertial coordinates. Subscripted scalars such as `k_y` are
//! dot products with the current axes; `k_dot` and `k_ddot` are inertial
//! derivatives resolved on those axes.

use nalgebra::{Matrix3, UnitQuaternion, Rotation3};

use crate::astro::{EarthModel, SatelliteState, Vec3};
use crate::error::{Error, Result};
use crate::target::TargetState;

/// `|k_y| < SINGULAR_TOLERANCE * |k|` is treated as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-9;
/// `|z_D x k| <= PARALLEL_TOLERANCE * |k|` is treated as parallel.
pub const PARALLEL_TOLERANCE: f64 = 1e-12;

pub type Dcm = Matrix3<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosState {
    pub rho: Vec3,
    pub rho_dot: Vec3,
    pub rho_ddot: Vec3,
    pub rho_mag: f64,
    pub rho_hat: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceVector {
    pub k: Vec3,
    pub k_dot: Vec3,
    pub k_ddot: Vec3,
}

impl ReferenceVector {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            k: factor * self.k,
            k_dot: factor * self.k_dot,
            k_ddot: factor * self.k_ddot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraParams {
    /// Focal length, m.
    pub focal_length: f64,
    /// Pixel pitch, m.
    pub pixel_pitch: f64,
    /// Line-rate bounds, Hz.
    pub f_lower: f64,
    pub f_upper: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        Self {
            focal_length: 0.6,
            pixel_pitch: 7e-6,
            f_lower: 0.0,
            f_upper: f64::INFINITY,
        }
    }
}

impl CameraParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length.is_finite() && self.focal_length > 0.0) {
            return Err(Error::validation("focal length must be positive"));
        }
        if !(self.pixel_pitch.is_finite() && self.pixel_pitch > 0.0) {
            return Err(Error::validation("pixel pitch must be positive"));
        }
        if !(self.f_lower >= 0.0 && self.f_lower < self.f_upper) {
            return Err(Error::validation("line-rate bounds must satisfy 0 <= f_lower < f_upper"));
        }
        Ok(())
    }
}

/// Line-rate quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMetrics {
    /// Apparent ground speed on the sensor plane, m/s.
    pub v_los: f64,
    /// Image speed on the focal plane, m/s.
    pub v_ccd: f64,
    /// Line rate, Hz.
    pub f_ccd: f64,
    /// Angle between the Earth-fixed target velocity and the boresight, rad.
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeCommand {
    pub dcm: Dcm,
    pub omega: Vec3,
    pub alpha: Vec3,
    pub metrics: ScanMetrics,
}

impl AttitudeCommand {
    /// Scalar-first unit quaternion of the inertial->desired rotation.
    pub fn quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.dcm))
    }
}

pub fn los_state(sat: &SatelliteState, tgt: &TargetState) -> Result<LosState> {
    let rho = tgt.position - sat.position;
    let rho_mag = rho.norm();
    if !(rho_mag > 0.0 && rho_mag.is_finite()) {
        return Err(Error::DegenerateGeometry("zero-length line of sight".into()));
    }
    Ok(LosState {
        rho,
        rho_dot: tgt.velocity - sat.velocity,
        rho_ddot: tgt.acceleration - sat.acceleration,
        rho_mag,
        rho_hat: rho / rho_mag,
    })
}

/// Zero-drift reference vector `k = -rF_dot` and its inertial derivatives.
pub fn reference_vector(tgt: &TargetState, earth: &EarthModel) -> Result<ReferenceVector> {
    let w = earth.rotation_vector();
    let k = -(tgt.velocity - w.cross(&tgt.position));
    let scale = tgt.velocity.norm() + w.cross(&tgt.position).norm();
    if k.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) || k.norm() == 0.0 {
        return Err(Error::DegenerateGeometry(
            "target has zero ground velocity; drift angle is undefined".into(),
        ));
    }
    Ok(ReferenceVector {
        k,
        k_dot: -(tgt.acceleration - w.cross(&tgt.velocity)),
        k_ddot: -(tgt.jerk - w.cross(&tgt.acceleration)),
    })
}

pub fn desired_frame(los: &LosState, reference: &ReferenceVector) -> Result<Dcm> {
    let z = los.rho_hat;
    let zk = z.cross(&reference.k);
    if zk.norm() <= PARALLEL_TOLERANCE * reference.k.norm() {
        return Err(Error::DegenerateGeometry(
            "reference vector is parallel to the boresight".into(),
        ));
    }
    let x = zk.normalize();
    let y = z.cross(&x);
    Ok(Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]))
}

fn axes(frame: &Dcm) -> (Vec3, Vec3, Vec3) {
    (
        frame.row(0).transpose(),
        frame.row(1).transpose(),
        frame.row(2).transpose(),
    )
}

fn checked_k_y(reference: &ReferenceVector, y: &Vec3) -> Result<f64> {
    let k_y = reference.k.dot(y);
    if k_y.abs() < SINGULAR_TOLERANCE * reference.k.norm() {
        return Err(Error::Singular(format!(
            "reference vector has vanishing y_D component ({k_y:e})"
        )));
    }
    Ok(k_y)
}

/// Boresight-normal part of the angular velocity, `rho x rho_dot / rho^2`.
pub fn perpendicular_rate(los: &LosState) -> Vec3 {
    los.rho.cross(&los.rho_dot) / (los.rho_mag * los.rho_mag)
}

/// Inertial angular velocity of the desired frame (inertial axes).
pub fn angular_velocity(los: &LosState, reference: &ReferenceVector, frame: &Dcm) -> Result<Vec3> {
    let (x, y, z) = axes(frame);
    let k_y = checked_k_y(reference, &y)?;
    let w_perp = perpendicular_rate(los);
    let w_y = w_perp.dot(&y);
    let k_z = reference.k.dot(&z);
    let kd_x = reference.k_dot.dot(&x);
    let w_z = (w_y * k_z - kd_x) / k_y;
    Ok(w_perp + w_z * z)
}

/// Inertial angular acceleration of the desired frame (inertial axes).
pub fn angular_acceleration(
    los: &LosState,
    reference: &ReferenceVector,
    frame: &Dcm,
    omega: &Vec3,
) -> Result<Vec3> {
    let (x, y, z) = axes(frame);
    let k_y = checked_k_y(reference, &y)?;
    let rho2 = los.rho_mag * los.rho_mag;
    let w_perp = perpendicular_rate(los);
    let (w_x, w_y, w_z) = (omega.dot(&x), omega.dot(&y), omega.dot(&z));
    let a_perp = los.rho.cross(&los.rho_ddot) / rho2 - 2.0 * los.rho.dot(&los.rho_dot) / rho2 * w_perp
        + w_perp.cross(&(w_z * z));
    let a_y = a_perp.dot(&y);
    let k_z = reference.k.dot(&z);
    let kd_y = reference.k_dot.dot(&y);
    let kd_z = reference.k_dot.dot(&z);
    let kdd_x = reference.k_ddot.dot(&x);
    let a_z = (a_y * k_z - w_x * w_z * k_z - w_x * w_y * k_y + 2.0 * w_y * kd_z - 2.0 * w_z * kd_y
        - kdd_x)
        / k_y;
    Ok(a_perp + a_z * z)
}

/// Sensor-plane speed, focal-plane speed and line rate.
pub fn scan_metrics(los: &LosState, tgt: &TargetState, frame: &Dcm, camera: &CameraParams) -> ScanMetrics {
    let z = frame.row(2).transpose();
    let ground = tgt.rf_dot;
    let speed = ground.norm();
    let psi = if speed > 0.0 {
        (ground.dot(&z) / speed).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    let v_los = speed * psi.sin();
    let v_ccd = camera.focal_length / los.rho_mag * v_los;
    ScanMetrics {
        v_los,
        v_ccd,
        f_ccd: v_ccd / camera.pixel_pitch,
        psi,
    }
}

/// Frame-relative velocity of the instantaneous ground point, inertial axes:
/// `-rF_dot + (z_D . rho_dot) z_D`.
pub fn relative_ground_motion(los: &LosState, tgt: &TargetState, frame: &Dcm) -> Vec3 {
    let z = frame.row(2).transpose();
    -tgt.rf_dot + z.dot(&los.rho_dot) * z
}

/// Signed angle between the sensor-plane projection of the relative ground
/// motion (desired-frame components) and the scan direction `-y_D`.
pub fn drift_angle(relative_motion_in_d: &Vec3) -> Result<f64> {
    let (vx, vy) = (relative_motion_in_d.x, relative_motion_in_d.y);
    let in_plane = vx.hypot(vy);
    if !(in_plane > 1e-12 * relative_motion_in_d.norm()) || in_plane == 0.0 {
        return Err(Error::DegenerateGeometry(
            "no in-plane relative motion; drift angle undefined".into(),
        ));
    }
    Ok(vx.atan2(-vy))
}

/// Full command for a satellite/target pair using the zero-drift reference.
pub fn command(
    sat: &SatelliteState,
    tgt: &TargetState,
    earth: &EarthModel,
    camera: &CameraParams,
) -> Result<AttitudeCommand> {
    let los = los_state(sat, tgt)?;
    let reference = reference_vector(tgt, earth)?;
    command_with_reference(&los, &reference, tgt, camera)
}

pub fn command_with_reference(
    los: &LosState,
    reference: &ReferenceVector,
    tgt: &TargetState,
    camera: &CameraParams,
) -> Result<AttitudeCommand> {
    let dcm = desired_frame(los, reference)?;
    let omega = angular_velocity(los, reference, &dcm)?;
    let alpha = angular_acceleration(los, reference, &dcm, &omega)?;
    Ok(AttitudeCommand {
        dcm,
        omega,
        alpha,
        metrics: scan_metrics(los, tgt, &dcm, camera),
    })
}

/// Angular velocity only; skips the acceleration terms.
pub fn rate_only(sat: &SatelliteState, tgt: &TargetState, earth: &EarthModel) -> Result<Vec3> {
    let los = los_state(sat, tgt)?;
    let reference = reference_vector(tgt, earth)?;
    let dcm = desired_frame(&los, &reference)?;
    angular_velocity(&los, &reference, &dcm)
}
