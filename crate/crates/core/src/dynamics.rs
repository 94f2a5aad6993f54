//! Three degree-of-freedom (surge, sway, yaw) rigid-body model of the
//! thruster-driven scale vessel.
//!
//! ```text
//! M ν̇ + C(ν) ν + D ν = τ
//! η̇ = J(ψ) ν
//! ```
//!
//! with `ν = [u, v, r]` in the body frame and `η = [x, y, ψ]` in the
//! Earth-fixed frame. Damping is linear in `ν` and the yaw row of `J` is the
//! identity, so `ψ̇ = r`.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Plausibility bound on |u| and |v| for the 1.17 m model (m/s).
pub const MAX_LINEAR_SPEED: f64 = 5.0;
/// Plausibility bound on |r| (rad/s).
pub const MAX_YAW_RATE: f64 = TAU;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("simulation diverged at t = {t:.4} s: {quantity} = {value} is outside its plausible range")]
    Divergence {
        t: f64,
        quantity: &'static str,
        value: f64,
    },
    #[error("invalid vessel parameter: {0}")]
    InvalidParams(String),
    #[error("timestep must be positive and finite, got {0}")]
    InvalidTimestep(f64),
}

/// Body-frame velocity `ν = [u, v, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocity {
    /// Surge (m/s).
    pub u: f64,
    /// Sway (m/s).
    pub v: f64,
    /// Yaw rate (rad/s).
    pub r: f64,
}

impl BodyVelocity {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.r.is_finite()
    }
}

/// Earth-fixed pose `η = [x, y, ψ]`. Heading is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EarthPose {
    /// North (m).
    pub x: f64,
    /// East (m).
    pub y: f64,
    /// Heading (rad), continuous.
    pub psi: f64,
}

impl EarthPose {
    pub const ORIGIN: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.psi)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.psi.is_finite()
    }
}

/// Generalized body-frame force `τ = [τx, τy, τn]`.
///
/// The third component is the yaw moment about the body z axis (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneralizedForce {
    pub tau_x: f64,
    pub tau_y: f64,
    pub tau_n: f64,
}

impl GeneralizedForce {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(tau_x: f64, tau_y: f64, tau_n: f64) -> Self {
        Self {
            tau_x,
            tau_y,
            tau_n,
        }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.tau_x, self.tau_y, self.tau_n)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.tau_x, self.tau_y, self.tau_n]
    }

    pub fn is_finite(&self) -> bool {
        self.tau_x.is_finite() && self.tau_y.is_finite() && self.tau_n.is_finite()
    }
}

/// Mass, damping and Coriolis constants of the vessel.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselParams {
    mass: Matrix3<f64>,
    mass_inv: Matrix3<f64>,
    damping: Matrix3<f64>,
    /// Surge mass entering `C(ν)`.
    m11: f64,
    /// Sway mass entering `C(ν)`.
    m22: f64,
}

impl Default for VesselParams {
    /// Scale-model values: `M = diag(19, 35.2, 20)`, `D = diag(6.3, 7, 2)`.
    fn default() -> Self {
        Self::new([19.0, 35.2, 20.0], [6.3, 7.0, 2.0]).expect("default vessel parameters are valid")
    }
}

impl VesselParams {
    /// Builds diagonal mass and damping matrices. The Coriolis coefficients
    /// are taken from the surge and sway masses.
    pub fn new(mass_diag: [f64; 3], damping_diag: [f64; 3]) -> Result<Self, DynamicsError> {
        for (name, vals) in [("mass", mass_diag), ("damping", damping_diag)] {
            if let Some(bad) = vals.iter().find(|&&m| !(m.is_finite() && m > 0.0)) {
                return Err(DynamicsError::InvalidParams(format!(
                    "{name} diagonal entries must be strictly positive, got {bad}"
                )));
            }
        }
        let mass = Matrix3::from_diagonal(&Vector3::from(mass_diag));
        let mass_inv = Matrix3::from_diagonal(&Vector3::from(mass_diag.map(|m| 1.0 / m)));
        Ok(Self {
            mass,
            mass_inv,
            damping: Matrix3::from_diagonal(&Vector3::from(damping_diag)),
            m11: mass_diag[0],
            m22: mass_diag[1],
        })
    }

    pub fn mass(&self) -> &Matrix3<f64> {
        &self.mass
    }

    pub fn mass_inv(&self) -> &Matrix3<f64> {
        &self.mass_inv
    }

    pub fn damping(&self) -> &Matrix3<f64> {
        &self.damping
    }

    pub fn coriolis_coefficients(&self) -> (f64, f64) {
        (self.m11, self.m22)
    }

    /// `½ νᵀ M ν`
    pub fn kinetic_energy(&self, nu: BodyVelocity) -> f64 {
        let n = nu.to_vector();
        0.5 * n.dot(&(self.mass * n))
    }
}

/// Stacked state `[ν; η]` plus simulation time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShipState {
    pub nu: BodyVelocity,
    pub eta: EarthPose,
    /// Seconds since the start of the run.
    pub t: f64,
}

impl ShipState {
    pub fn new(nu: BodyVelocity, eta: EarthPose) -> Self {
        Self { nu, eta, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.nu.is_finite() && self.eta.is_finite() && self.t.is_finite()
    }

    /// Rejects non-finite components and velocities beyond the plausibility
    /// bounds of the scale model.
    pub fn check_plausible(&self) -> Result<(), DynamicsError> {
        let checks = [
            ("u", self.nu.u, MAX_LINEAR_SPEED),
            ("v", self.nu.v, MAX_LINEAR_SPEED),
            ("r", self.nu.r, MAX_YAW_RATE),
            ("x", self.eta.x, f64::INFINITY),
            ("y", self.eta.y, f64::INFINITY),
            ("psi", self.eta.psi, f64::INFINITY),
        ];
        for (quantity, value, bound) in checks {
            if !value.is_finite() || value.abs() > bound {
                return Err(DynamicsError::Divergence {
                    t: self.t,
                    quantity,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Time derivative of the stacked state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub nu_dot: Vector3<f64>,
    pub eta_dot: Vector3<f64>,
}

/// Skew-symmetric Coriolis and centripetal matrix `C(ν)`.
pub fn coriolis_matrix(nu: BodyVelocity, p: &VesselParams) -> Matrix3<f64> {
    let (m11, m22) = p.coriolis_coefficients();
    let a = m22 * nu.v;
    let b = m11 * nu.u;
    #[rustfmt::skip]
    let c = Matrix3::new(
        0.0, 0.0, -a,
        0.0, 0.0,  b,
          a,  -b, 0.0,
    );
    c
}

/// Body-to-Earth kinematic transform `J(ψ)`.
pub fn rotation(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    #[rustfmt::skip]
    let j = Matrix3::new(
        c,  -s,  0.0,
        s,   c,  0.0,
        0.0, 0.0, 1.0,
    );
    j
}

/// Coriolis plus damping load `C(ν)ν + Dν` that the thrusters must overcome
/// to hold the current velocity.
pub fn hydrodynamic_load(nu: BodyVelocity, p: &VesselParams) -> Vector3<f64> {
    let n = nu.to_vector();
    coriolis_matrix(nu, p) * n + p.damping() * n
}

pub fn derivative(state: &ShipState, tau: GeneralizedForce, p: &VesselParams) -> StateRate {
    derivative_parts(state.nu.to_vector(), state.eta.psi, tau.to_vector(), p)
}

fn derivative_parts(nu: Vector3<f64>, psi: f64, tau: Vector3<f64>, p: &VesselParams) -> StateRate {
    let body = BodyVelocity::from_vector(&nu);
    let nu_dot = p.mass_inv() * (tau - hydrodynamic_load(body, p));
    let eta_dot = rotation(psi) * nu;
    StateRate { nu_dot, eta_dot }
}

/// Advances the state by one classical fourth-order Runge-Kutta step with
/// `tau` held constant over the step.
pub fn step_rk4(
    state: &ShipState,
    tau: GeneralizedForce,
    p: &VesselParams,
    h: f64,
) -> Result<ShipState, DynamicsError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(DynamicsError::InvalidTimestep(h));
    }
    let tau = tau.to_vector();
    let nu0 = state.nu.to_vector();
    let eta0 = state.eta.to_vector();

    let k1 = derivative_parts(nu0, eta0[2], tau, p);
    let nu1 = nu0 + k1.nu_dot * (0.5 * h);
    let eta1 = eta0 + k1.eta_dot * (0.5 * h);
    let k2 = derivative_parts(nu1, eta1[2], tau, p);
    let nu2 = nu0 + k2.nu_dot * (0.5 * h);
    let eta2 = eta0 + k2.eta_dot * (0.5 * h);
    let k3 = derivative_parts(nu2, eta2[2], tau, p);
    let nu3 = nu0 + k3.nu_dot * h;
    let eta3 = eta0 + k3.eta_dot * h;
    let k4 = derivative_parts(nu3, eta3[2], tau, p);

    let w = h / 6.0;
    let nu = nu0 + (k1.nu_dot + 2.0 * k2.nu_dot + 2.0 * k3.nu_dot + k4.nu_dot) * w;
    let eta = eta0 + (k1.eta_dot + 2.0 * k2.eta_dot + 2.0 * k3.eta_dot + k4.eta_dot) * w;

    let next = ShipState {
        nu: BodyVelocity::from_vector(&nu),
        eta: EarthPose::from_vector(&eta),
        t: state.t + h,
    };
    next.check_plausible()?;
    Ok(next)
}
