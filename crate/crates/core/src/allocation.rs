//! Mapping between the generalized force and the four azimuth thrusters.
//!
//! Thrusters 1 and 2 steer independently; thrusters 3 and 4 share one azimuth
//! angle. The forward map is `τ = H(α) f`. The inverse used in the control
//! loop is the minimum-norm pseudo-inverse at fixed angles, followed by a
//! magnitude clip and a slew-rate limit.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, SMatrix, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::GeneralizedForce;

pub type ConfigurationMatrix = SMatrix<f64, 3, 4>;

/// Tolerance on `α₃ = α₄`.
pub const PAIRED_ANGLE_TOL: f64 = 1e-12;

/// Fixed azimuth angles used in the control loop: stern pair pointing aft
/// (π) and the bow pair pointing to starboard (π/2).
pub const FIXED_AZIMUTHS: [f64; 4] = [PI, PI, FRAC_PI_2, FRAC_PI_2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocationError {
    #[error("azimuth angles of thrusters 3 and 4 must be equal, got {alpha3} and {alpha4}")]
    UnpairedAngles { alpha3: f64, alpha4: f64 },
    #[error("configuration matrix has rank {rank} < 3; the generalized force is not fully actuated")]
    RankDeficient { rank: usize },
    #[error("invalid thruster layout: {0}")]
    InvalidLayout(String),
    #[error("timestep must be positive and finite, got {0}")]
    InvalidTimestep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrusterLayout {
    /// Yaw moment arm of each thruster about the centre of gravity (m).
    pub moment_arms: [f64; 4],
    /// Phase shifts θ₁, θ₂ of the stern thrusters (rad).
    pub phase_shifts: [f64; 2],
    /// Per-thruster magnitude limit (N).
    pub f_max: f64,
    /// Per-thruster slew limit (N/s).
    pub f_rate_max: f64,
}

impl Default for ThrusterLayout {
    fn default() -> Self {
        Self {
            moment_arms: [0.497, 0.497, 0.407, 0.527],
            phase_shifts: [0.0, 0.0],
            f_max: 2.0,
            f_rate_max: 10.0,
        }
    }
}

impl ThrusterLayout {
    pub fn validate(&self) -> Result<(), AllocationError> {
        if let Some(a) = self.moment_arms.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(AllocationError::InvalidLayout(format!(
                "moment arms must be strictly positive, got {a}"
            )));
        }
        if !self.phase_shifts.iter().all(|t| t.is_finite()) {
            return Err(AllocationError::InvalidLayout("phase shifts must be finite".into()));
        }
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return Err(AllocationError::InvalidLayout(format!(
                "f_max must be positive, got {}",
                self.f_max
            )));
        }
        if !(self.f_rate_max.is_finite() && self.f_rate_max > 0.0) {
            return Err(AllocationError::InvalidLayout(format!(
                "f_rate_max must be positive, got {}",
                self.f_rate_max
            )));
        }
        Ok(())
    }
}

/// Thrust magnitudes and azimuth angles of the four thrusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrusterCommand {
    /// Thrust (N).
    pub f: [f64; 4],
    /// Azimuth (rad).
    pub alpha: [f64; 4],
}

impl ThrusterCommand {
    pub fn idle(alpha: [f64; 4]) -> Self {
        Self { f: [0.0; 4], alpha }
    }

    pub fn check_paired(&self) -> Result<(), AllocationError> {
        check_paired(&self.alpha)
    }
}

/// A limited command plus whether limiting changed it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub command: ThrusterCommand,
    pub saturated: bool,
}

fn check_paired(alpha: &[f64; 4]) -> Result<(), AllocationError> {
    if (alpha[2] - alpha[3]).abs() > PAIRED_ANGLE_TOL || !alpha.iter().all(|a| a.is_finite()) {
        return Err(AllocationError::UnpairedAngles {
            alpha3: alpha[2],
            alpha4: alpha[3],
        });
    }
    Ok(())
}

/// `(sin, cos)` that returns exact 0 and ±1 at integer multiples of π/2.
fn quadrant_exact_sin_cos(angle: f64) -> (f64, f64) {
    let q = angle / FRAC_PI_2;
    let k = q.round();
    if (q - k).abs() < 1e-12 {
        match (k as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        angle.sin_cos()
    }
}

/// Thruster configuration matrix `H(α)`.
pub fn build_h(alpha: &[f64; 4], layout: &ThrusterLayout) -> Result<ConfigurationMatrix, AllocationError> {
    check_paired(alpha)?;
    let l = &layout.moment_arms;
    let th = &layout.phase_shifts;
    let mut h = ConfigurationMatrix::zeros();
    for (i, &a) in alpha.iter().enumerate() {
        let (s, c) = quadrant_exact_sin_cos(a);
        h[(0, i)] = c;
        h[(1, i)] = s;
        let arm_sin = match i {
            0 | 1 => quadrant_exact_sin_cos(a - th[i]).0,
            _ => s,
        };
        h[(2, i)] = l[i] * arm_sin;
    }
    Ok(h)
}

pub fn forces_to_tau(cmd: &ThrusterCommand, layout: &ThrusterLayout) -> Result<GeneralizedForce, AllocationError> {
    let h = build_h(&cmd.alpha, layout)?;
    Ok(GeneralizedForce::from_vector(&(h * Vector4::from(cmd.f))))
}

fn rank(h: &ConfigurationMatrix) -> usize {
    let sv = h.svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > max * 1e-10).count()
}

/// `Hᵀ(HHᵀ)⁻¹` for a full-row-rank `H`.
fn pseudo_inverse(h: &ConfigurationMatrix) -> Result<SMatrix<f64, 4, 3>, AllocationError> {
    let r = rank(h);
    if r < 3 {
        return Err(AllocationError::RankDeficient { rank: r });
    }
    let gram: Matrix3<f64> = h * h.transpose();
    let gram_inv = gram
        .try_inverse()
        .ok_or(AllocationError::RankDeficient { rank: 2 })?;
    Ok(h.transpose() * gram_inv)
}

/// Allocation at fixed angles with the pseudo-inverse cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocator {
    alpha: [f64; 4],
    layout: ThrusterLayout,
    h: ConfigurationMatrix,
    h_pinv: SMatrix<f64, 4, 3>,
}

impl Allocator {
    pub fn new(alpha: [f64; 4], layout: ThrusterLayout) -> Result<Self, AllocationError> {
        layout.validate()?;
        let h = build_h(&alpha, &layout)?;
        let h_pinv = pseudo_inverse(&h)?;
        Ok(Self {
            alpha,
            layout,
            h,
            h_pinv,
        })
    }

    pub fn layout(&self) -> &ThrusterLayout {
        &self.layout
    }

    pub fn alpha(&self) -> [f64; 4] {
        self.alpha
    }

    pub fn matrix(&self) -> &ConfigurationMatrix {
        &self.h
    }

    /// Minimum-norm forces realizing `tau` exactly, without limits.
    pub fn unconstrained(&self, tau: GeneralizedForce) -> [f64; 4] {
        (self.h_pinv * tau.to_vector()).into()
    }

    pub fn tau_of(&self, f: &[f64; 4]) -> GeneralizedForce {
        GeneralizedForce::from_vector(&(self.h * Vector4::from(*f)))
    }

    /// Magnitude clip only; used to seed the first command of a run.
    pub fn clipped(&self, tau: GeneralizedForce) -> Allocation {
        let raw = self.unconstrained(tau);
        let fm = self.layout.f_max;
        let f = raw.map(|x| x.clamp(-fm, fm));
        Allocation {
            command: ThrusterCommand { f, alpha: self.alpha },
            saturated: f != raw,
        }
    }

    /// Pseudo-inverse, then clip to `±f_max`, then slew-limit to
    /// `f_rate_max · h` around `previous`.
    pub fn allocate(
        &self,
        tau: GeneralizedForce,
        previous: &ThrusterCommand,
        h: f64,
    ) -> Result<Allocation, AllocationError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(AllocationError::InvalidTimestep(h));
        }
        let raw = self.unconstrained(tau);
        let fm = self.layout.f_max;
        let step = self.layout.f_rate_max * h;
        let mut f = [0.0; 4];
        for i in 0..4 {
            let clipped = raw[i].clamp(-fm, fm);
            f[i] = clipped.clamp(previous.f[i] - step, previous.f[i] + step);
        }
        Ok(Allocation {
            command: ThrusterCommand { f, alpha: self.alpha },
            saturated: f != raw,
        })
    }
}

/// One-shot allocation that rebuilds `H(α)` and its pseudo-inverse.
pub fn allocate(
    tau: GeneralizedForce,
    alpha: [f64; 4],
    layout: &ThrusterLayout,
    previous: &ThrusterCommand,
    h: f64,
) -> Result<Allocation, AllocationError> {
    Allocator::new(alpha, *layout)?.allocate(tau, previous, h)
}

/// `H H⁺ τ` residual helper for diagnostics.
pub fn residual(alloc: &Allocator, f: &[f64; 4], tau: GeneralizedForce) -> f64 {
    let got: Vector3<f64> = alloc.tau_of(f).to_vector();
    (got - tau.to_vector()).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> ThrusterLayout {
        ThrusterLayout::default()
    }

    #[test]
    fn fixed_angles_reproduce_printed_matrix() {
        let h = build_h(&FIXED_AZIMUTHS, &layout()).unwrap();
        #[rustfmt::skip]
        let expected = ConfigurationMatrix::new(
            -1.0, -1.0, 0.0,   0.0,
             0.0,  0.0, 1.0,   1.0,
             0.0,  0.0, 0.407, 0.527,
        );
        assert_eq!(h, expected);
    }

    #[test]
    fn zero_angles() {
        let h = build_h(&[0.0; 4], &layout()).unwrap();
        for i in 0..4 {
            assert_eq!(h[(0, i)], 1.0);
            assert_eq!(h[(1, i)], 0.0);
            assert_eq!(h[(2, i)], 0.0);
        }
    }

    #[test]
    fn all_angles_starboard() {
        let h = build_h(&[FRAC_PI_2; 4], &layout()).unwrap();
        let arms = [0.497, 0.497, 0.407, 0.527];
        for i in 0..4 {
            assert_eq!(h[(0, i)], 0.0);
            assert_eq!(h[(1, i)], 1.0);
            assert_eq!(h[(2, i)], arms[i]);
        }
    }

    #[test]
    fn phase_shift_enters_stern_moment_only() {
        let mut l = layout();
        l.phase_shifts = [0.1, -0.2];
        let a = [0.7, -0.3, 0.4, 0.4];
        let h = build_h(&a, &l).unwrap();
        assert_eq!(h[(2, 0)], 0.497 * (0.7f64 - 0.1).sin());
        assert_eq!(h[(2, 1)], 0.497 * (-0.3f64 + 0.2).sin());
        assert_eq!(h[(2, 2)], 0.407 * 0.4f64.sin());
        assert_eq!(h[(1, 0)], 0.7f64.sin());
    }

    #[test]
    fn unpaired_bow_angles_rejected() {
        let err = build_h(&[PI, PI, 0.5, 0.6], &layout()).unwrap_err();
        assert!(matches!(err, AllocationError::UnpairedAngles { .. }));
    }

    #[test]
    fn forward_map_examples() {
        let l = layout();
        let cmd = ThrusterCommand { f: [1.0, 1.0, 0.0, 0.0], alpha: FIXED_AZIMUTHS };
        assert_eq!(forces_to_tau(&cmd, &l).unwrap(), GeneralizedForce::new(-2.0, 0.0, 0.0));
        let cmd = ThrusterCommand { f: [0.0, 0.0, 1.0, 1.0], alpha: FIXED_AZIMUTHS };
        let tau = forces_to_tau(&cmd, &l).unwrap();
        assert_eq!(tau.tau_x, 0.0);
        assert_eq!(tau.tau_y, 2.0);
        assert!((tau.tau_n - 0.934).abs() < 1e-15);
        let cmd = ThrusterCommand::idle(FIXED_AZIMUTHS);
        assert_eq!(forces_to_tau(&cmd, &l).unwrap(), GeneralizedForce::ZERO);
    }

    #[test]
    fn zero_demand_allocates_nothing() {
        let prev = ThrusterCommand::idle(FIXED_AZIMUTHS);
        let a = allocate(GeneralizedForce::ZERO, FIXED_AZIMUTHS, &layout(), &prev, 0.01).unwrap();
        assert_eq!(a.command.f, [0.0; 4]);
        assert!(!a.saturated);
    }

    #[test]
    fn pure_surge_splits_evenly_between_stern_thrusters() {
        let alloc = Allocator::new(FIXED_AZIMUTHS, layout()).unwrap();
        let f = alloc.unconstrained(GeneralizedForce::new(-2.0, 0.0, 0.0));
        for (got, want) in f.iter().zip([1.0, 1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{f:?}");
        }
    }

    #[test]
    fn bow_angles_at_zero_lose_sway_and_yaw() {
        let err = Allocator::new([PI, PI, 0.0, 0.0], layout()).unwrap_err();
        assert!(matches!(err, AllocationError::RankDeficient { rank: 1 }));
    }

    #[test]
    fn clip_sets_saturation_flag() {
        let alloc = Allocator::new(FIXED_AZIMUTHS, layout()).unwrap();
        let prev = ThrusterCommand { f: [-2.0, -2.0, 0.0, 0.0], alpha: FIXED_AZIMUTHS };
        let a = alloc.allocate(GeneralizedForce::new(10.0, 0.0, 0.0), &prev, 0.01).unwrap();
        assert!(a.saturated);
        assert_eq!(a.command.f, [-2.0, -2.0, 0.0, 0.0]);
    }

    #[test]
    fn slew_limit_bounds_change_per_step() {
        let alloc = Allocator::new(FIXED_AZIMUTHS, layout()).unwrap();
        let prev = ThrusterCommand::idle(FIXED_AZIMUTHS);
        let a = alloc.allocate(GeneralizedForce::new(-2.0, 0.0, 0.0), &prev, 0.01).unwrap();
        assert!(a.saturated);
        for (f, want) in a.command.f.iter().zip([0.1, 0.1, 0.0, 0.0]) {
            assert!((f - want).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_layouts_rejected() {
        let mut l = layout();
        l.f_max = 0.0;
        assert!(Allocator::new(FIXED_AZIMUTHS, l).is_err());
        let mut l = layout();
        l.moment_arms[2] = -0.4;
        assert!(l.validate().is_err());
        let mut l = layout();
        l.f_rate_max = f64::INFINITY;
        assert!(l.validate().is_err());
    }
}
