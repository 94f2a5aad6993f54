//! The closed loop shared by tuning, dataset generation and the scenario
//! harness: reference → controller → allocation → thrusters → RK4 step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocation::{AllocationError, Allocator, ThrusterCommand, FIXED_AZIMUTHS};
use crate::dynamics::{step_rk4, DynamicsError, EarthPose, GeneralizedForce, ShipState, VesselParams};
use crate::reference::{DesiredPose, FilterParams, PoseReference, ReferenceError, Setpoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error("invalid maneuver: {0}")]
    InvalidManeuver(String),
}

/// Anything that maps the current state and desired pose to a generalized
/// force demand.
pub trait Controller {
    fn control(&mut self, state: &ShipState, desired: &DesiredPose) -> GeneralizedForce;
}

/// Leaves the thrusters idle.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoControl;

impl Controller for NoControl {
    fn control(&mut self, _: &ShipState, _: &DesiredPose) -> GeneralizedForce {
        GeneralizedForce::ZERO
    }
}

impl<C: Controller + ?Sized> Controller for &mut C {
    fn control(&mut self, state: &ShipState, desired: &DesiredPose) -> GeneralizedForce {
        (**self).control(state, desired)
    }
}

impl<C: Controller + ?Sized> Controller for Box<C> {
    fn control(&mut self, state: &ShipState, desired: &DesiredPose) -> GeneralizedForce {
        (**self).control(state, desired)
    }
}

/// A timed operator command. Missing position components keep the previous
/// setpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    /// Activation time (s).
    pub t: f64,
    /// Heading (rad).
    pub psi: f64,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl Command {
    pub fn heading(t: f64, psi: f64) -> Self {
        Self { t, psi, x: None, y: None }
    }

    pub fn pose(t: f64, psi: f64, x: f64, y: f64) -> Self {
        Self {
            t,
            psi,
            x: Some(x),
            y: Some(y),
        }
    }
}

/// Initial state, command schedule and length of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Maneuver {
    pub initial: ShipState,
    pub schedule: Vec<Command>,
    /// Run length (s).
    pub duration: f64,
    /// Speed of the desired point along the desired heading (m/s).
    pub transit_speed: f64,
    /// Pose the reference filters are resting at when the run starts, e.g. a
    /// station the vessel has been pushed off. `None` starts them at the
    /// vessel's pose.
    pub reference_start: Option<EarthPose>,
}

impl Maneuver {
    pub fn validate(&self) -> Result<(), LoopError> {
        let bad = |m: String| Err(LoopError::InvalidManeuver(m));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !self.initial.is_finite() || self.initial.t != 0.0 {
            return bad("initial state must be finite and start at t = 0".into());
        }
        if !(self.transit_speed.is_finite() && self.transit_speed >= 0.0) {
            return bad(format!("transit speed must be non-negative, got {}", self.transit_speed));
        }
        if self.reference_start.is_some_and(|p| !(p.x.is_finite() && p.y.is_finite() && p.psi.is_finite())) {
            return bad("reference start pose must be finite".into());
        }
        for w in self.schedule.windows(2) {
            if w[1].t <= w[0].t {
                return bad(format!(
                    "schedule times must be strictly increasing ({} then {})",
                    w[0].t, w[1].t
                ));
            }
        }
        if let Some(c) = self.schedule.iter().find(|c| {
            !(c.t.is_finite() && c.t >= 0.0 && c.psi.is_finite())
                || c.x.is_some_and(|x| !x.is_finite())
                || c.y.is_some_and(|y| !y.is_finite())
        }) {
            return bad(format!("schedule entry at t = {} is not finite", c.t));
        }
        Ok(())
    }

    pub fn reference_pose(&self) -> EarthPose {
        self.reference_start.unwrap_or(self.initial.eta)
    }

    /// Setpoint in force at time `t`.
    pub fn setpoint_at(&self, t: f64) -> Setpoint {
        let eta = self.reference_pose();
        let mut sp = Setpoint {
            psi: eta.psi,
            x: eta.x,
            y: eta.y,
        };
        for c in self.schedule.iter().take_while(|c| c.t <= t + 1e-9) {
            sp.psi = c.psi;
            sp.x = c.x.unwrap_or(sp.x);
            sp.y = c.y.unwrap_or(sp.y);
        }
        sp
    }
}

/// Plant, actuator and reference settings of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub vessel: VesselParams,
    pub allocator: Allocator,
    pub reference: FilterParams,
    /// Integration step (s).
    pub timestep: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            vessel: VesselParams::default(),
            allocator: Allocator::new(FIXED_AZIMUTHS, Default::default())
                .expect("default thruster layout is fully actuated"),
            reference: FilterParams::default(),
            timestep: 0.01,
        }
    }
}

/// Everything known at one sample instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub state: ShipState,
    pub desired: DesiredPose,
    /// Controller demand.
    pub tau_demand: GeneralizedForce,
    /// Force actually produced by the limited thruster command.
    pub tau_applied: GeneralizedForce,
    pub command: ThrusterCommand,
    pub saturated: bool,
}

/// Runs `maneuver` under `controller`, calling `observe` at every sample
/// instant `t_k = k·h`, `k = 0..=N`. The force computed at `t_k` is held over
/// `[t_k, t_k + h)`. The first thruster command is only magnitude-clipped so
/// a run that starts in motion does not begin in slew limiting.
pub fn simulate<C, F>(cfg: &LoopConfig, maneuver: &Maneuver, mut controller: C, mut observe: F) -> Result<(), LoopError>
where
    C: Controller,
    F: FnMut(&StepLog),
{
    maneuver.validate()?;
    let h = cfg.timestep;
    if !(h.is_finite() && h > 0.0) {
        return Err(DynamicsError::InvalidTimestep(h).into());
    }
    let steps = (maneuver.duration / h).round() as usize;
    let mut reference = PoseReference::new(cfg.reference, maneuver.reference_pose(), maneuver.transit_speed)?;
    let mut state = maneuver.initial;
    state.check_plausible()?;
    let mut desired = reference.current();
    let mut previous: Option<ThrusterCommand> = None;

    for k in 0..=steps {
        let t = k as f64 * h;
        state.t = t;
        let tau_demand = controller.control(&state, &desired);
        let alloc = match &previous {
            None => cfg.allocator.clipped(tau_demand),
            Some(prev) => cfg.allocator.allocate(tau_demand, prev, h)?,
        };
        let tau_applied = cfg.allocator.tau_of(&alloc.command.f);
        observe(&StepLog {
            state,
            desired,
            tau_demand,
            tau_applied,
            command: alloc.command,
            saturated: alloc.saturated,
        });
        if k == steps {
            break;
        }
        state = step_rk4(&state, tau_applied, &cfg.vessel, h)?;
        desired = reference.step(maneuver.setpoint_at(t), h)?;
        previous = Some(alloc.command);
    }
    Ok(())
}

/// Collects every sample of a run.
pub fn simulate_logged<C: Controller>(cfg: &LoopConfig, maneuver: &Maneuver, controller: C) -> Result<Vec<StepLog>, LoopError> {
    let mut out = Vec::with_capacity((maneuver.duration / cfg.timestep) as usize + 2);
    simulate(cfg, maneuver, controller, |s| out.push(*s))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::BodyVelocity;

    fn still() -> Maneuver {
        Maneuver {
            initial: ShipState::default(),
            schedule: vec![],
            duration: 5.0,
            transit_speed: 0.0,
            reference_start: None,
        }
    }

    #[test]
    fn idle_vessel_at_rest_stays_put() {
        let log = simulate_logged(&LoopConfig::default(), &still(), NoControl).unwrap();
        assert_eq!(log.len(), 501);
        let last = log.last().unwrap();
        assert_eq!(last.state.eta, EarthPose::ORIGIN);
        assert_eq!(last.state.nu, BodyVelocity::ZERO);
        assert!((last.state.t - 5.0).abs() < 1e-12);
        assert!(log.iter().all(|s| !s.saturated));
    }

    #[test]
    fn setpoint_follows_schedule() {
        let mut m = still();
        m.schedule = vec![Command::heading(1.0, 0.2), Command::pose(2.0, 0.3, 1.0, -1.0), Command::heading(3.0, 0.1)];
        assert_eq!(m.setpoint_at(0.5).psi, 0.0);
        assert_eq!(m.setpoint_at(1.0).psi, 0.2);
        let sp = m.setpoint_at(3.5);
        assert_eq!((sp.psi, sp.x, sp.y), (0.1, 1.0, -1.0));
    }

    #[test]
    fn rejects_non_increasing_schedule() {
        let mut m = still();
        m.schedule = vec![Command::heading(1.0, 0.2), Command::heading(1.0, 0.3)];
        assert!(matches!(m.validate(), Err(LoopError::InvalidManeuver(_))));
        let mut m = still();
        m.duration = 0.0;
        assert!(m.validate().is_err());
    }
}
