//! Spherical Earth model, ECEF/ECI relations and two-body propagation.
//!
//! Times are seconds since scenario start. The inertial frame is aligned with
//! the Earth-fixed frame at `t = 0` up to the configured initial rotation angle.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Seconds since scenario start.
pub type Epoch = f64;

/// Fixed RK4 step used by [`propagate`].
pub const PROPAGATION_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthModel {
    /// Equatorial radius, m.
    pub radius: f64,
    /// Gravitational parameter, m^3/s^2.
    pub mu: f64,
    /// Magnitude of the Earth rotation vector (along inertial +z), rad/s.
    pub rotation_rate: f64,
    /// Earth rotation angle at t = 0, rad.
    pub initial_angle: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self {
            radius: 6_378_137.0,
            mu: 3.986_004_418e14,
            rotation_rate: 7.292_115_9e-5,
            initial_angle: 0.0,
        }
    }
}

impl EarthModel {
    /// Same model with Earth rotation switched off.
    pub fn non_rotating(self) -> Self {
        Self {
            rotation_rate: 0.0,
            ..self
        }
    }

    pub fn rotation_vector(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.rotation_rate)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.radius, self.mu, self.rotation_rate, self.initial_angle]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("earth model has non-finite fields"));
        }
        if self.radius <= 0.0 {
            return Err(Error::validation("earth radius must be positive"));
        }
        if self.mu <= 0.0 {
            return Err(Error::validation("gravitational parameter must be positive"));
        }
        if self.rotation_rate < 0.0 {
            return Err(Error::validation("earth rotation rate must be non-negative"));
        }
        Ok(())
    }

    /// ECEF -> ECI rotation at `epoch`.
    pub fn earth_rotation_dcm(&self, epoch: Epoch) -> Matrix3<f64> {
        earth_rotation_dcm(self, epoch)
    }

    /// Earth-fixed position of geocentric latitude/longitude (degrees) on the sphere.
    pub fn surface_point(&self, lat_deg: f64, lon_deg: f64) -> Vec3 {
        let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
        self.radius * Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
    }
}

/// ECEF -> ECI direction cosine matrix: rotation about +z by `rate * t + theta0`.
pub fn earth_rotation_dcm(earth: &EarthModel, epoch: Epoch) -> Matrix3<f64> {
    let angle = earth.initial_angle + earth.rotation_rate * epoch;
    Rotation3::from_axis_angle(&Vec3::z_axis(), angle).into_inner()
}

/// Earth-fixed-frame derivative of `vec` given its inertial derivative,
/// both resolved in inertial axes.
pub fn fixed_frame_derivative(vec_inertial_deriv: &Vec3, vec: &Vec3, earth: &EarthModel) -> Vec3 {
    vec_inertial_deriv - earth.rotation_vector().cross(vec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub jerk: Vec3,
}

impl SatelliteState {
    /// Fills acceleration and jerk from the two-body closure.
    pub fn from_position_velocity(position: Vec3, velocity: Vec3, mu: f64) -> Self {
        Self {
            position,
            velocity,
            acceleration: two_body_acceleration(&position, mu),
            jerk: two_body_jerk(&position, &velocity, mu),
        }
    }

    pub fn specific_energy(&self, mu: f64) -> f64 {
        0.5 * self.velocity.norm_squared() - mu / self.position.norm()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.position.cross(&self.velocity)
    }
}

pub fn two_body_acceleration(r: &Vec3, mu: f64) -> Vec3 {
    let rn = r.norm();
    -mu / (rn * rn * rn) * r
}

/// Time derivative of the two-body acceleration along the flow.
pub fn two_body_jerk(r: &Vec3, v: &Vec3, mu: f64) -> Vec3 {
    let rn = r.norm();
    let r3 = rn * rn * rn;
    let r5 = r3 * rn * rn;
    -mu * (v / r3 - 3.0 * r.dot(v) / r5 * r)
}

/// Classical orbital elements, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee: f64,
    pub true_anomaly: f64,
}

impl OrbitalElements {
    /// Inertial position and velocity.
    pub fn to_cartesian(&self, mu: f64) -> Result<(Vec3, Vec3)> {
        let e = self.eccentricity;
        if !(0.0..1.0).contains(&e) {
            return Err(Error::validation("eccentricity must lie in [0, 1)"));
        }
        if self.semi_major_axis <= 0.0 {
            return Err(Error::validation("semi-major axis must be positive"));
        }
        let p = self.semi_major_axis * (1.0 - e * e);
        let (sn, cn) = self.true_anomaly.sin_cos();
        let r = p / (1.0 + e * cn);
        let r_pf = Vec3::new(r * cn, r * sn, 0.0);
        let k = (mu / p).sqrt();
        let v_pf = Vec3::new(-k * sn, k * (e + cn), 0.0);
        let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), self.raan)
            * Rotation3::from_axis_angle(&Vec3::x_axis(), self.inclination)
            * Rotation3::from_axis_angle(&Vec3::z_axis(), self.arg_perigee);
        Ok((rot * r_pf, rot * v_pf))
    }

    pub fn period(&self, mu: f64) -> f64 {
        2.0 * std::f64::consts::PI * (self.semi_major_axis.powi(3) / mu).sqrt()
    }
}

fn rk4_step(r: &Vec3, v: &Vec3, h: f64, mu: f64) -> (Vec3, Vec3) {
    let k1r = *v;
    let k1v = two_body_acceleration(r, mu);
    let k2r = v + 0.5 * h * k1v;
    let k2v = two_body_acceleration(&(r + 0.5 * h * k1r), mu);
    let k3r = v + 0.5 * h * k2v;
    let k3v = two_body_acceleration(&(r + 0.5 * h * k2r), mu);
    let k4r = v + h * k3v;
    let k4v = two_body_acceleration(&(r + h * k3r), mu);
    (
        r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

fn validate_initial(position: &Vec3, velocity: &Vec3, earth: &EarthModel) -> Result<()> {
    if !(position.iter().chain(velocity.iter()).all(|x| x.is_finite())) {
        return Err(Error::validation("non-finite satellite state"));
    }
    let rn = position.norm();
    if rn <= earth.radius {
        return Err(Error::Impact {
            t: 0.0,
            radius: rn,
        });
    }
    if 0.5 * velocity.norm_squared() - earth.mu / rn >= 0.0 {
        return Err(Error::validation("initial state is not on a bound (elliptic) orbit"));
    }
    Ok(())
}

/// Two-body propagation from `t = 0` to `epoch` with fixed 0.1 s RK4 steps
/// (the final step is shortened to land on `epoch`).
pub fn propagate(
    position: &Vec3,
    velocity: &Vec3,
    epoch: Epoch,
    earth: &EarthModel,
) -> Result<SatelliteState> {
    validate_initial(position, velocity, earth)?;
    if !epoch.is_finite() {
        return Err(Error::validation("non-finite epoch"));
    }
    let (r, v) = advance(*position, *velocity, 0.0, epoch, earth)?;
    Ok(SatelliteState::from_position_velocity(r, v, earth.mu))
}

fn advance(mut r: Vec3, mut v: Vec3, from: f64, to: f64, earth: &EarthModel) -> Result<(Vec3, Vec3)> {
    let span = to - from;
    let dir = span.signum();
    let full = (span.abs() / PROPAGATION_STEP).floor() as usize;
    let mut t = from;
    for _ in 0..full {
        let (rn, vn) = rk4_step(&r, &v, dir * PROPAGATION_STEP, earth.mu);
        r = rn;
        v = vn;
        t += dir * PROPAGATION_STEP;
        check_altitude(&r, t, earth)?;
    }
    let rest = to - (from + dir * full as f64 * PROPAGATION_STEP);
    if rest != 0.0 {
        let (rn, vn) = rk4_step(&r, &v, rest, earth.mu);
        r = rn;
        v = vn;
        check_altitude(&r, to, earth)?;
    }
    Ok((r, v))
}

fn check_altitude(r: &Vec3, t: f64, earth: &EarthModel) -> Result<()> {
    let rn = r.norm();
    if !rn.is_finite() || rn <= earth.radius {
        return Err(Error::Impact { t, radius: rn });
    }
    Ok(())
}

/// Pre-propagated satellite trajectory on a fixed 0.1 s lattice.
///
/// `state_at` reproduces [`propagate`] exactly: it restarts from the lattice
/// sample just below `t` and takes the same final partial step.
#[derive(Debug, Clone)]
pub struct Ephemeris {
    earth: EarthModel,
    samples: Vec<(Vec3, Vec3)>,
}

impl Ephemeris {
    pub fn new(position: Vec3, velocity: Vec3, horizon: f64, earth: EarthModel) -> Result<Self> {
        validate_initial(&position, &velocity, &earth)?;
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::validation("ephemeris horizon must be finite and non-negative"));
        }
        let count = (horizon / PROPAGATION_STEP).ceil() as usize + 2;
        let mut samples = Vec::with_capacity(count);
        let (mut r, mut v) = (position, velocity);
        samples.push((r, v));
        for i in 1..count {
            let (rn, vn) = rk4_step(&r, &v, PROPAGATION_STEP, earth.mu);
            r = rn;
            v = vn;
            check_altitude(&r, i as f64 * PROPAGATION_STEP, &earth)?;
            samples.push((r, v));
        }
        Ok(Self { earth, samples })
    }

    pub fn earth(&self) -> &EarthModel {
        &self.earth
    }

    pub fn initial(&self) -> (Vec3, Vec3) {
        self.samples[0]
    }

    pub fn state_at(&self, t: Epoch) -> Result<SatelliteState> {
        let idx = (t / PROPAGATION_STEP).floor();
        if !(t.is_finite() && idx >= 0.0 && (idx as usize) < self.samples.len()) {
            let (r0, v0) = self.samples[0];
            return propagate(&r0, &v0, t, &self.earth);
        }
        let idx = idx as usize;
        let (r, v) = self.samples[idx];
        let rest = t - idx as f64 * PROPAGATION_STEP;
        let (r, v) = if rest != 0.0 {
            rk4_step(&r, &v, rest, self.earth.mu)
        } else {
            (r, v)
        };
        Ok(SatelliteState::from_position_velocity(r, v, self.earth.mu))
    }
}
