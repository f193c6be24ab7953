//! TOML scenario configuration.
//!
//! Numbers are SI; angles are in degrees and converted to radians on load.
//! Every validation error names the offending field path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::astro::{EarthModel, OrbitalElements};
use crate::attitude::CameraParams;
use crate::ddp::SolverParams;
use crate::error::{Error, Result};
use crate::ocp::{Method, SoftmaxSchedule, StripScenario, DEFAULT_SHARPNESS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub time: TimeConfig,
    #[serde(default)]
    pub earth: EarthConfig,
    pub orbit: OrbitConfig,
    pub strip: StripConfig,
    pub camera: CameraConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Imaging duration, s.
    pub duration: f64,
    /// Control interval, s.
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarthConfig {
    pub radius: f64,
    pub mu: f64,
    pub rotation_rate: f64,
    pub initial_angle_deg: f64,
    pub rotating: bool,
}

impl Default for EarthConfig {
    fn default() -> Self {
        let e = EarthModel::default();
        Self {
            radius: e.radius,
            mu: e.mu,
            rotation_rate: e.rotation_rate,
            initial_angle_deg: e.initial_angle.to_degrees(),
            rotating: true,
        }
    }
}

/// Classical elements at `t = 0`. Exactly one of `altitude` (circular
/// height above `earth.radius`) and `semi_major_axis` must be given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_major_axis: Option<f64>,
    #[serde(default)]
    pub eccentricity: f64,
    pub inclination_deg: f64,
    #[serde(default)]
    pub raan_deg: f64,
    #[serde(default)]
    pub arg_perigee_deg: f64,
    pub true_anomaly_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

/// Earth-fixed endpoints of the great-circle strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripConfig {
    pub start: GeoPoint,
    pub end: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub focal_length: f64,
    pub pixel_pitch: f64,
    /// Line-rate bounds, Hz; both or neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveChoice {
    All,
    Linear,
    MinIntegral,
    MinMax,
}

impl ObjectiveChoice {
    /// Methods to run; the linear scan is always included as the baseline.
    pub fn methods(&self) -> Vec<Method> {
        match self {
            ObjectiveChoice::All => Method::ALL.to_vec(),
            ObjectiveChoice::Linear => vec![Method::Linear],
            ObjectiveChoice::MinIntegral => vec![Method::Linear, Method::MinIntegral],
            ObjectiveChoice::MinMax => vec![Method::Linear, Method::MinMax],
        }
    }
}

impl std::str::FromStr for ObjectiveChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "linear" => Ok(Self::Linear),
            "min-integral" => Ok(Self::MinIntegral),
            "min-max" => Ok(Self::MinMax),
            _ => Err(Error::config(
                "run.objective",
                format!("unknown objective `{s}` (all, linear, min-integral, min-max)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub objective: ObjectiveChoice,
    /// Adds a line-rate-constrained minimum-integral run.
    pub constrained: bool,
    /// `N * peak` of the min-max surrogate.
    pub sharpness: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            objective: ObjectiveChoice::All,
            constrained: false,
            sharpness: DEFAULT_SHARPNESS,
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, "must be finite"))
    }
}

fn latitude(path: &str, p: &GeoPoint) -> Result<()> {
    finite(&format!("{path}.lat_deg"), p.lat_deg)?;
    finite(&format!("{path}.lon_deg"), p.lon_deg)?;
    if p.lat_deg.abs() > 90.0 {
        return Err(Error::config(format!("{path}.lat_deg"), "must lie in [-90, 90]"));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.into_inner().message().trim().to_string();
            Error::config(if path == "." { "<root>".to_string() } else { path }, message)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::config("<root>", e.to_string()))
    }

    /// Field-level checks; [`ScenarioConfig::build`] adds the geometric ones.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        positive("time.duration", self.time.duration)?;
        positive("time.dt", self.time.dt)?;
        let ratio = self.time.duration / self.time.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config("time.dt", "must divide time.duration"));
        }

        positive("earth.radius", self.earth.radius)?;
        positive("earth.mu", self.earth.mu)?;
        finite("earth.rotation_rate", self.earth.rotation_rate)?;
        if self.earth.rotation_rate < 0.0 {
            return Err(Error::config("earth.rotation_rate", "must be non-negative"));
        }
        finite("earth.initial_angle_deg", self.earth.initial_angle_deg)?;

        let o = &self.orbit;
        match (o.altitude, o.semi_major_axis) {
            (Some(h), None) => positive("orbit.altitude", h)?,
            (None, Some(a)) => {
                positive("orbit.semi_major_axis", a)?;
                if a * (1.0 - o.eccentricity) <= self.earth.radius {
                    return Err(Error::config("orbit.semi_major_axis", "perigee lies inside the Earth"));
                }
            }
            _ => {
                return Err(Error::config(
                    "orbit",
                    "exactly one of `altitude` and `semi_major_axis` is required",
                ))
            }
        }
        if !(o.eccentricity.is_finite() && (0.0..1.0).contains(&o.eccentricity)) {
            return Err(Error::config("orbit.eccentricity", "must lie in [0, 1)"));
        }
        if o.altitude.is_some() && o.eccentricity != 0.0 {
            return Err(Error::config("orbit.eccentricity", "`altitude` describes a circular orbit"));
        }
        finite("orbit.inclination_deg", o.inclination_deg)?;
        finite("orbit.raan_deg", o.raan_deg)?;
        finite("orbit.arg_perigee_deg", o.arg_perigee_deg)?;
        finite("orbit.true_anomaly_deg", o.true_anomaly_deg)?;

        latitude("strip.start", &self.strip.start)?;
        latitude("strip.end", &self.strip.end)?;

        let c = &self.camera;
        positive("camera.focal_length", c.focal_length)?;
        positive("camera.pixel_pitch", c.pixel_pitch)?;
        match (c.f_lower, c.f_upper) {
            (None, None) => {}
            (Some(lo), Some(hi)) => {
                finite("camera.f_lower", lo)?;
                positive("camera.f_upper", hi)?;
                if !(lo >= 0.0 && lo < hi) {
                    return Err(Error::config("camera.f_lower", "must satisfy 0 <= f_lower < f_upper"));
                }
            }
            (Some(_), None) => return Err(Error::config("camera.f_upper", "required with camera.f_lower")),
            (None, Some(_)) => return Err(Error::config("camera.f_lower", "required with camera.f_upper")),
        }

        self.solver.validate().map_err(|e| match e {
            Error::Validation(msg) => {
                let (path, message) = msg.split_once(' ').unwrap_or(("solver", msg.as_str()));
                Error::config(path, message)
            }
            other => other,
        })?;

        if SoftmaxSchedule::new(self.run.sharpness).is_err() {
            return Err(Error::config(
                "run.sharpness",
                format!("must lie in (0, {}]", SoftmaxSchedule::MAX_SHARPNESS),
            ));
        }
        self.check_constrained()
    }

    fn check_constrained(&self) -> Result<()> {
        if !self.run.constrained {
            return Ok(());
        }
        if self.camera.f_lower.is_none() {
            return Err(Error::config(
                "run.constrained",
                "constrained runs need camera.f_lower and camera.f_upper",
            ));
        }
        if !matches!(self.run.objective, ObjectiveChoice::All | ObjectiveChoice::MinIntegral) {
            return Err(Error::config(
                "run.constrained",
                "constrained runs use the min-integral objective",
            ));
        }
        Ok(())
    }

    pub fn earth_model(&self) -> EarthModel {
        EarthModel {
            radius: self.earth.radius,
            mu: self.earth.mu,
            rotation_rate: if self.earth.rotating { self.earth.rotation_rate } else { 0.0 },
            initial_angle: self.earth.initial_angle_deg.to_radians(),
        }
    }

    pub fn orbital_elements(&self) -> OrbitalElements {
        let o = &self.orbit;
        OrbitalElements {
            semi_major_axis: o
                .semi_major_axis
                .unwrap_or_else(|| self.earth.radius + o.altitude.unwrap_or(0.0)),
            eccentricity: o.eccentricity,
            inclination: o.inclination_deg.to_radians(),
            raan: o.raan_deg.to_radians(),
            arg_perigee: o.arg_perigee_deg.to_radians(),
            true_anomaly: o.true_anomaly_deg.to_radians(),
        }
    }

    pub fn camera_params(&self) -> CameraParams {
        CameraParams {
            focal_length: self.camera.focal_length,
            pixel_pitch: self.camera.pixel_pitch,
            f_lower: self.camera.f_lower.unwrap_or(0.0),
            f_upper: self.camera.f_upper.unwrap_or(f64::INFINITY),
        }
    }

    /// Builds the scenario; geometric failures keep their kinematic error kind.
    pub fn build(&self) -> Result<StripScenario> {
        self.validate()?;
        let earth = self.earth_model();
        let (position, velocity) = self
            .orbital_elements()
            .to_cartesian(earth.mu)
            .map_err(|e| Error::config("orbit", e.to_string()))?;
        let start = earth.surface_point(self.strip.start.lat_deg, self.strip.start.lon_deg);
        let end = earth.surface_point(self.strip.end.lat_deg, self.strip.end.lon_deg);
        StripScenario::new(
            self.name.clone(),
            earth,
            position,
            velocity,
            start,
            end,
            self.time.duration,
            self.time.dt,
            self.camera_params(),
        )
    }
}
