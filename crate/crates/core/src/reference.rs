//! Second-order reference filters that turn step commands into smooth
//! desired trajectories.
//!
//! Each filter realizes `ω²/(s² + 2ζωs + ω²)` and is advanced with the exact
//! zero-order-hold discretization `x⁺ = x_ss + Φ(h)(x − x_ss)`, where
//! `x_ss = [command, 0]` and `Φ(h) = exp(A h)`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::EarthPose;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("natural frequency must be positive and finite, got {0} rad/s")]
    NaturalFrequency(f64),
    #[error("damping ratio must be at least 1, got {0}")]
    DampingRatio(f64),
    #[error("timestep must be positive and finite, got {0}")]
    InvalidTimestep(f64),
    #[error("transit speed must be finite and non-negative, got {0}")]
    TransitSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Undamped natural frequency (rad/s).
    pub omega_n: f64,
    pub zeta: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            omega_n: 0.1,
            zeta: 1.0,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), ReferenceError> {
        if !(self.omega_n.is_finite() && self.omega_n > 0.0) {
            return Err(ReferenceError::NaturalFrequency(self.omega_n));
        }
        if !(self.zeta.is_finite() && self.zeta >= 1.0 - 1e-9) {
            return Err(ReferenceError::DampingRatio(self.zeta));
        }
        Ok(())
    }
}

/// Single-axis critically (or over-) damped reference model.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    params: FilterParams,
    value: f64,
    rate: f64,
    transition: Option<(f64, Matrix2<f64>)>,
}

impl ReferenceModel {
    pub fn new(params: FilterParams) -> Result<Self, ReferenceError> {
        params.validate()?;
        Ok(Self {
            params,
            value: 0.0,
            rate: 0.0,
            transition: None,
        })
    }

    /// Starts the filter at rest on `value`.
    pub fn at(params: FilterParams, value: f64) -> Result<Self, ReferenceError> {
        let mut m = Self::new(params)?;
        m.value = value;
        Ok(m)
    }

    pub fn params(&self) -> FilterParams {
        self.params
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn transition(&mut self, h: f64) -> Matrix2<f64> {
        match self.transition {
            Some((cached_h, phi)) if cached_h == h => phi,
            _ => {
                let w = self.params.omega_n;
                let a = Matrix2::new(0.0, 1.0, -w * w, -2.0 * self.params.zeta * w);
                let phi = (a * h).exp();
                self.transition = Some((h, phi));
                phi
            }
        }
    }

    /// Advances one step toward `command`; returns the new `(value, rate)`.
    pub fn step(&mut self, command: f64, h: f64) -> Result<(f64, f64), ReferenceError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(ReferenceError::InvalidTimestep(h));
        }
        let phi = self.transition(h);
        let dev = phi * Vector2::new(self.value - command, self.rate);
        self.value = command + dev[0];
        self.rate = dev[1];
        Ok((self.value, self.rate))
    }
}

/// Closed-form critically damped step response from rest,
/// `target·(1 − (1 + ωt)e^{−ωt})`.
pub fn critically_damped_step(target: f64, omega_n: f64, t: f64) -> f64 {
    let wt = omega_n * t;
    target * (1.0 - (1.0 + wt) * (-wt).exp())
}

/// Operator command: heading plus position setpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setpoint {
    /// Commanded heading (rad).
    pub psi: f64,
    /// Position setpoint (m), Earth frame.
    pub x: f64,
    pub y: f64,
}

/// Desired pose and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DesiredPose {
    pub eta: EarthPose,
    pub eta_dot: EarthPose,
}

/// Pose reference: one filter per axis, plus an optional along-heading
/// transit at constant speed that is added to the filtered position.
///
/// With zero transit speed this is a station-keeping reference; with a
/// positive speed the desired point moves along the desired heading, so a
/// heading change also turns the desired track.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseReference {
    heading: ReferenceModel,
    north: ReferenceModel,
    east: ReferenceModel,
    transit_speed: f64,
    transit_offset: (f64, f64),
}

impl PoseReference {
    pub fn new(params: FilterParams, start: EarthPose, transit_speed: f64) -> Result<Self, ReferenceError> {
        if !(transit_speed.is_finite() && transit_speed >= 0.0) {
            return Err(ReferenceError::TransitSpeed(transit_speed));
        }
        Ok(Self {
            heading: ReferenceModel::at(params, start.psi)?,
            north: ReferenceModel::at(params, start.x)?,
            east: ReferenceModel::at(params, start.y)?,
            transit_speed,
            transit_offset: (0.0, 0.0),
        })
    }

    pub fn current(&self) -> DesiredPose {
        let psi = self.heading.value();
        let (s, c) = psi.sin_cos();
        let u = self.transit_speed;
        DesiredPose {
            eta: EarthPose::new(
                self.north.value() + self.transit_offset.0,
                self.east.value() + self.transit_offset.1,
                psi,
            ),
            eta_dot: EarthPose::new(self.north.rate() + u * c, self.east.rate() + u * s, self.heading.rate()),
        }
    }

    pub fn step(&mut self, cmd: Setpoint, h: f64) -> Result<DesiredPose, ReferenceError> {
        let psi_before = self.heading.value();
        self.heading.step(cmd.psi, h)?;
        self.north.step(cmd.x, h)?;
        self.east.step(cmd.y, h)?;
        if self.transit_speed > 0.0 {
            let mid = 0.5 * (psi_before + self.heading.value());
            let d = self.transit_speed * h;
            self.transit_offset.0 += d * mid.cos();
            self.transit_offset.1 += d * mid.sin();
        }
        Ok(self.current())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FilterParams {
        FilterParams { omega_n: 0.5, zeta: 1.0 }
    }

    #[test]
    fn zero_command_stays_at_zero() {
        let mut m = ReferenceModel::new(params()).unwrap();
        for _ in 0..1000 {
            assert_eq!(m.step(0.0, 0.01).unwrap(), (0.0, 0.0));
        }
    }

    #[test]
    fn matches_closed_form_at_five_time_constants() {
        let w: f64 = 0.5;
        let h = 0.01;
        let mut m = ReferenceModel::new(params()).unwrap();
        let n = (5.0 / w / h).round() as usize;
        let mut y = 0.0;
        for _ in 0..n {
            y = m.step(1.0, h).unwrap().0;
        }
        assert!((y - 0.9596).abs() < 5e-5, "{y}");
        assert!((y - critically_damped_step(1.0, w, n as f64 * h)).abs() < 1e-9);
    }

    #[test]
    fn settles_to_command() {
        let w: f64 = 0.5;
        let h = 0.01;
        let mut m = ReferenceModel::new(params()).unwrap();
        let n = (15.0 / w / h).round() as usize;
        let mut y = 0.0;
        for _ in 0..n {
            y = m.step(0.2, h).unwrap().0;
        }
        // the residual at 15/ωn is 16e^-15 ≈ 4.9e-6 of the step
        assert!((y - 0.2).abs() < 1e-6);
        assert!(((0.2 - y) - 0.2 * 16.0 * (-15f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn rejects_underdamped_and_bad_frequency() {
        assert_eq!(
            ReferenceModel::new(FilterParams { omega_n: 0.5, zeta: 0.7 }).unwrap_err(),
            ReferenceError::DampingRatio(0.7)
        );
        assert!(ReferenceModel::new(FilterParams { omega_n: 0.0, zeta: 1.0 }).is_err());
        assert!(ReferenceModel::new(FilterParams { omega_n: 0.5, zeta: 1.0 - 1e-10 }).is_ok());
    }

    #[test]
    fn rejects_bad_timestep() {
        let mut m = ReferenceModel::new(params()).unwrap();
        assert!(m.step(1.0, -0.1).is_err());
    }

    #[test]
    fn transit_moves_along_desired_heading() {
        let mut r = PoseReference::new(params(), EarthPose::ORIGIN, 0.2).unwrap();
        let mut d = r.current();
        for _ in 0..1000 {
            d = r.step(Setpoint::default(), 0.01).unwrap();
        }
        assert!((d.eta.x - 2.0).abs() < 1e-12);
        assert_eq!(d.eta.y, 0.0);
        assert_eq!(d.eta_dot.x, 0.2);
    }

    #[test]
    fn station_keeping_reference_has_no_transit() {
        let start = EarthPose::new(1.0, -1.0, 0.0);
        let mut r = PoseReference::new(params(), start, 0.0).unwrap();
        let mut d = r.current();
        assert_eq!(d.eta, start);
        for _ in 0..6000 {
            d = r.step(Setpoint::default(), 0.01).unwrap();
        }
        assert!(d.eta.x.abs() < 1e-6 && d.eta.y.abs() < 1e-6);
    }
}
