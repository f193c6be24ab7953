use crate::astro::{EarthModel, Ephemeris, SatelliteState, Vec3};
use crate::attitude::{self, AttitudeCommand, CameraParams, Dcm};
use crate::ddp::Horizon;
use crate::error::{Error, Result};
use crate::target::{build_curve, ScanState, TargetCurve, TargetState};

/// One strip-imaging pass: satellite ephemeris, ground strip, time grid and camera.
#[derive(Debug, Clone)]
pub struct StripScenario {
    pub name: String,
    pub earth: EarthModel,
    pub ephemeris: Ephemeris,
    pub curve: TargetCurve,
    pub horizon: Horizon,
    pub camera: CameraParams,
}

/// Rate and line-rate kinematics at one `(s, u, t)` sample with a held scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub omega: Vec3,
    pub f_ccd: f64,
}

impl StripScenario {
    /// Builds and validates a scenario; the imaging window is `[0, duration]`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        earth: EarthModel,
        position: Vec3,
        velocity: Vec3,
        strip_start: Vec3,
        strip_end: Vec3,
        duration: f64,
        dt: f64,
        camera: CameraParams,
    ) -> Result<Self> {
        earth.validate()?;
        camera.validate()?;
        let horizon = Horizon::new(0.0, duration, dt)?;
        let curve = build_curve(&strip_start, &strip_end, earth.radius)?;
        let ephemeris = Ephemeris::new(position, velocity, duration, earth)?;
        let scenario = Self {
            name: name.into(),
            earth,
            ephemeris,
            curve,
            horizon,
            camera,
        };
        scenario.check_visibility()?;
        Ok(scenario)
    }

    /// Terminal arc angle `s_f`, rad.
    pub fn arc_length(&self) -> f64 {
        self.curve.arc_length
    }

    pub fn duration(&self) -> f64 {
        self.horizon.tf() - self.horizon.t0
    }

    pub fn has_line_rate_bounds(&self) -> bool {
        self.camera.f_lower > 0.0 || self.camera.f_upper.is_finite()
    }

    pub fn satellite(&self, t: f64) -> Result<SatelliteState> {
        self.ephemeris.state_at(t)
    }

    pub fn target(&self, scan: &ScanState, t: f64) -> Result<TargetState> {
        self.curve.eval(scan, t, &self.earth)
    }

    /// Frame, rate and line rate for a zero-order-hold scan (`s_ddot = 0`).
    pub fn sample(&self, s: f64, u: f64, t: f64) -> Result<ScanSample> {
        let sat = self.satellite(t)?;
        let tgt = self.target(&ScanState::held(s, u), t)?;
        let los = attitude::los_state(&sat, &tgt)?;
        let reference = attitude::reference_vector(&tgt, &self.earth)?;
        let frame: Dcm = attitude::desired_frame(&los, &reference)?;
        let omega = attitude::angular_velocity(&los, &reference, &frame)?;
        let metrics = attitude::scan_metrics(&los, &tgt, &frame, &self.camera);
        Ok(ScanSample {
            omega,
            f_ccd: metrics.f_ccd,
        })
    }

    /// Angular velocity of the desired frame for a held scan.
    pub fn rate(&self, s: f64, u: f64, t: f64) -> Result<Vec3> {
        Ok(self.sample(s, u, t)?.omega)
    }

    /// Full attitude command for an arbitrary scan state.
    pub fn command(&self, scan: &ScanState, t: f64) -> Result<AttitudeCommand> {
        let sat = self.satellite(t)?;
        let tgt = self.target(scan, t)?;
        attitude::command(&sat, &tgt, &self.earth, &self.camera)
    }

    /// The target must stay above the local horizon along the linear scan.
    pub fn check_visibility(&self) -> Result<()> {
        let rate = self.arc_length() / self.duration();
        for node in 0..self.horizon.nodes() {
            let t = self.horizon.time(node);
            let s = rate * (t - self.horizon.t0);
            let sat = self.satellite(t)?;
            let tgt = self.target(&ScanState::held(s, rate), t)?;
            let up = tgt.position.normalize();
            if (sat.position - tgt.position).dot(&up) <= 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "strip point at t = {t} s is below the satellite's horizon"
                )));
            }
        }
        Ok(())
    }
}
