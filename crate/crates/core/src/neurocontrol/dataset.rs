//! Teacher demonstrations: closed-loop sliding-mode runs logged as
//! `(features, τ)` pairs.

use std::cell::Cell;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_loop::{simulate, Command, Controller, LoopConfig, LoopError, Maneuver};
use crate::dynamics::{BodyVelocity, EarthPose, GeneralizedForce, ShipState};
use crate::reference::DesiredPose;
use crate::teacher::{SlidingMode, SmcGains, TeacherError};

pub const N_FEATURES: usize = 7;
pub const FEATURE_NAMES: [&str; N_FEATURES] = ["e_x_m", "e_y_m", "e_psi_rad", "e_psi_dot_rad_s", "u_m_s", "v_m_s", "r_rad_s"];

/// `[e_x, e_y, e_ψ, ė_ψ, u, v, r]`: Earth-frame position error, heading
/// error and its rate, then body velocities.
pub fn features(state: &ShipState, desired: &DesiredPose) -> [f64; N_FEATURES] {
    let nu = state.nu;
    [
        desired.eta.x - state.eta.x,
        desired.eta.y - state.eta.y,
        desired.eta.psi - state.eta.psi,
        desired.eta_dot.psi - nu.r,
        nu.u,
        nu.v,
        nu.r,
    ]
}

/// Where a sample came from, kept so the teacher's output can be replayed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOrigin {
    pub state: ShipState,
    pub desired: DesiredPose,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSample {
    /// Unnormalized features.
    pub features: [f64; N_FEATURES],
    pub target: GeneralizedForce,
    pub origin: SampleOrigin,
}

/// The family of maneuvers the teacher is demonstrated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Battery {
    /// Each magnitude is run as both a positive and negative step (deg).
    pub heading_steps_deg: Vec<f64>,
    /// Straight running before each heading step (s).
    pub step_time_s: f64,
    pub step_duration_s: f64,
    pub transit_speed_m_s: f64,
    /// Extra step runs per magnitude with perturbed initial velocities.
    pub perturbed_runs_per_step: usize,
    pub station_keeping_runs: usize,
    /// Station-keeping runs start with the station already held, i.e. the
    /// vessel has been pushed off a settled reference. Otherwise the
    /// reference starts at the vessel and is filtered onto the station.
    pub hold_station: bool,
    pub max_offset_m: f64,
    pub max_heading_offset_deg: f64,
    pub station_keeping_duration_s: f64,
    pub max_initial_speed_m_s: f64,
    pub max_initial_yaw_rate_deg_s: f64,
    /// Interval between logged samples (s).
    pub sampling_period_s: f64,
    /// Half-widths of the uniform force offset added to the teacher's output
    /// before allocation `[N, N, N·m]`. Labels stay the teacher's clean
    /// output, so the pool shows recoveries from states a slightly wrong
    /// controller drifts into.
    pub action_noise: [f64; 3],
    /// How long each offset is held (s).
    pub action_noise_hold_s: f64,
    pub seed: u64,
}

impl Default for Battery {
    fn default() -> Self {
        Self {
            heading_steps_deg: vec![5.0, 10.0, 20.0, 30.0, 40.0],
            step_time_s: 10.0,
            step_duration_s: 120.0,
            transit_speed_m_s: 0.2,
            perturbed_runs_per_step: 1,
            station_keeping_runs: 8,
            hold_station: true,
            max_offset_m: 2.0,
            max_heading_offset_deg: 0.0,
            station_keeping_duration_s: 120.0,
            max_initial_speed_m_s: 0.01,
            max_initial_yaw_rate_deg_s: 0.2,
            sampling_period_s: 0.1,
            action_noise: [0.05, 0.05, 0.005],
            action_noise_hold_s: 2.0,
            seed: 1,
        }
    }
}

impl Battery {
    pub fn noise(&self) -> ActionNoise {
        ActionNoise {
            amplitude: self.action_noise,
            hold_s: self.action_noise_hold_s,
        }
    }

    pub fn empty() -> Self {
        Self {
            heading_steps_deg: vec![],
            perturbed_runs_per_step: 0,
            station_keeping_runs: 0,
            ..Self::default()
        }
    }

    /// Expands the battery into concrete maneuvers, deterministically in
    /// `seed`.
    pub fn maneuvers(&self) -> Vec<Maneuver> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        let u0 = self.transit_speed_m_s;
        let jitter = |rng: &mut ChaCha8Rng| {
            let s = self.max_initial_speed_m_s;
            let r = self.max_initial_yaw_rate_deg_s.to_radians();
            BodyVelocity::new(
                if s > 0.0 { rng.random_range(-s..s) } else { 0.0 },
                if s > 0.0 { rng.random_range(-s..s) } else { 0.0 },
                if r > 0.0 { rng.random_range(-r..r) } else { 0.0 },
            )
        };
        for &mag in &self.heading_steps_deg {
            for sign in [1.0, -1.0] {
                let step = Command::heading(self.step_time_s, sign * mag.to_radians());
                for run in 0..=self.perturbed_runs_per_step {
                    let mut nu = BodyVelocity::new(u0, 0.0, 0.0);
                    if run > 0 {
                        let j = jitter(&mut rng);
                        nu = BodyVelocity::new(nu.u + j.u, j.v, j.r);
                    }
                    out.push(Maneuver {
                        initial: ShipState::new(nu, EarthPose::ORIGIN),
                        schedule: vec![step],
                        duration: self.step_duration_s,
                        transit_speed: u0,
                        reference_start: None,
                    });
                }
            }
        }
        for _ in 0..self.station_keeping_runs {
            let radius = self.max_offset_m * rng.random_range(0.0f64..1.0).sqrt();
            let bearing = rng.random_range(-PI..PI);
            let psi0 = if self.max_heading_offset_deg > 0.0 {
                let m = self.max_heading_offset_deg.to_radians();
                rng.random_range(-m..m)
            } else {
                0.0
            };
            let start = EarthPose::new(radius * bearing.cos(), radius * bearing.sin(), psi0);
            out.push(Maneuver {
                initial: ShipState::new(jitter(&mut rng), start),
                schedule: vec![Command::pose(0.0, 0.0, 0.0, 0.0)],
                duration: self.station_keeping_duration_s,
                transit_speed: 0.0,
                reference_start: self.hold_station.then_some(EarthPose::ORIGIN),
            });
        }
        out
    }
}

/// Piecewise-constant offset applied to the executed teacher output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionNoise {
    pub amplitude: [f64; 3],
    pub hold_s: f64,
}

impl ActionNoise {
    pub const NONE: Self = Self {
        amplitude: [0.0; 3],
        hold_s: 1.0,
    };

    fn is_none(&self) -> bool {
        self.amplitude.iter().all(|&a| a == 0.0)
    }
}

/// The teacher with its output offset; remembers the clean output as the
/// label.
struct Perturbed<'a> {
    teacher: SlidingMode,
    noise: ActionNoise,
    rng: ChaCha8Rng,
    offset: GeneralizedForce,
    next_draw: f64,
    clean: &'a Cell<GeneralizedForce>,
}

impl Controller for Perturbed<'_> {
    fn control(&mut self, state: &ShipState, desired: &DesiredPose) -> GeneralizedForce {
        let tau = self.teacher.control(state, desired);
        self.clean.set(tau);
        if self.noise.is_none() {
            return tau;
        }
        if state.t >= self.next_draw {
            let [a, b, c] = self.noise.amplitude.map(|a| if a > 0.0 { self.rng.random_range(-a..a) } else { 0.0 });
            self.offset = GeneralizedForce::new(a, b, c);
            self.next_draw = state.t + self.noise.hold_s;
        }
        GeneralizedForce::new(tau.tau_x + self.offset.tau_x, tau.tau_y + self.offset.tau_y, tau.tau_n + self.offset.tau_n)
    }
}

/// Runs the teacher on every maneuver and logs one sample every
/// `sampling_period` seconds over `[0, duration)`. Returns the pool shuffled
/// with `shuffle_seed`.
///
/// The teacher is expected to have passed its own closed-loop checks first.
pub fn generate_dataset(
    cfg: &LoopConfig,
    gains: SmcGains,
    maneuvers: &[Maneuver],
    sampling_period: f64,
    noise: ActionNoise,
    shuffle_seed: u64,
) -> Result<Vec<TrainingSample>, TeacherError> {
    if !(noise.amplitude.iter().all(|a| a.is_finite() && *a >= 0.0) && noise.hold_s.is_finite() && noise.hold_s > 0.0) {
        return Err(LoopError::InvalidManeuver(format!("invalid action noise {noise:?}")).into());
    }
    let stride = (sampling_period / cfg.timestep).round() as usize;
    if stride == 0 || !sampling_period.is_finite() || (stride as f64 * cfg.timestep - sampling_period).abs() > 1e-9 * sampling_period {
        return Err(LoopError::InvalidManeuver(format!(
            "sampling period {sampling_period} s is not a whole multiple of the timestep {} s",
            cfg.timestep
        ))
        .into());
    }
    let mut pool = Vec::new();
    let clean = Cell::new(GeneralizedForce::ZERO);
    for (i, m) in maneuvers.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
        rng.set_stream(i as u64 + 1);
        let teacher = Perturbed {
            teacher: SlidingMode::new(gains, cfg.vessel.clone())?,
            noise,
            rng,
            offset: GeneralizedForce::ZERO,
            next_draw: 0.0,
            clean: &clean,
        };
        let end = (m.duration / cfg.timestep).round() as usize;
        let mut k = 0usize;
        simulate(cfg, m, teacher, |s| {
            if k % stride == 0 && k < end {
                pool.push(TrainingSample {
                    features: features(&s.state, &s.desired),
                    target: clean.get(),
                    origin: SampleOrigin {
                        state: s.state,
                        desired: s.desired,
                    },
                });
            }
            k += 1;
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    pool.shuffle(&mut rng);
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teacher::smc_control;

    #[test]
    fn empty_battery_gives_empty_dataset() {
        let cfg = LoopConfig::default();
        let maneuvers = Battery::empty().maneuvers();
        assert!(maneuvers.is_empty());
        let data = generate_dataset(&cfg, SmcGains::default(), &maneuvers, 0.1, ActionNoise::NONE, 0).unwrap();
        assert!(data.is_empty());
    }

    #[test]
    fn one_step_run_sample_count() {
        let cfg = LoopConfig::default();
        let m = Maneuver {
            initial: ShipState::new(BodyVelocity::new(0.2, 0.0, 0.0), EarthPose::ORIGIN),
            schedule: vec![Command::heading(10.0, 20f64.to_radians())],
            duration: 100.0,
            transit_speed: 0.2,
            reference_start: None,
        };
        let data = generate_dataset(&cfg, SmcGains::default(), &[m], 0.1, ActionNoise::NONE, 0).unwrap();
        assert_eq!(data.len(), 1000);
    }

    #[test]
    fn samples_replay_through_the_teacher() {
        let cfg = LoopConfig::default();
        let battery = Battery {
            heading_steps_deg: vec![10.0],
            step_duration_s: 30.0,
            station_keeping_runs: 1,
            station_keeping_duration_s: 30.0,
            ..Battery::default()
        };
        let g = SmcGains::default();
        let data = generate_dataset(&cfg, g, &battery.maneuvers(), 0.5, battery.noise(), 3).unwrap();
        assert!(!data.is_empty());
        for s in &data {
            let replay = smc_control(&s.origin.state, &s.origin.desired, &g, &cfg.vessel);
            assert_eq!(replay, s.target);
            assert_eq!(features(&s.origin.state, &s.origin.desired), s.features);
        }
    }

    #[test]
    fn battery_layout() {
        let b = Battery::default();
        let m = b.maneuvers();
        assert_eq!(m.len(), 5 * 2 * 2 + 8);
        assert_eq!(m, b.maneuvers());
        for sk in &m[20..] {
            let p = sk.initial.eta;
            assert!(p.x.hypot(p.y) <= 2.0);
            assert_eq!(sk.transit_speed, 0.0);
        }
    }

    #[test]
    fn sampling_period_must_be_whole_steps() {
        let cfg = LoopConfig::default();
        assert!(generate_dataset(&cfg, SmcGains::default(), &[], 0.001, ActionNoise::NONE, 0).is_err());
        assert!(generate_dataset(&cfg, SmcGains::default(), &[], 0.015, ActionNoise::NONE, 0).is_err());
        assert!(generate_dataset(&cfg, SmcGains::default(), &[], 0.03, ActionNoise::NONE, 0).is_ok());
    }
}
