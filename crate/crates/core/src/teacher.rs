//! Sliding-mode pose controller used as the expert that the neural
//! controller is cloned from, plus a seeded gain search.
//!
//! Errors are formed in the Earth frame, `e = η_d − η` and
//! `ė = η̇_d − J(ψ)ν`, with one first-order surface per axis,
//! `s = ė + Λe`. The switching term `K tanh(s/φ)` is rotated into the body
//! frame and, by default, the hydrodynamic load `C(ν)ν + Dν` is fed forward:
//!
//! ```text
//! τ = Jᵀ(ψ) K tanh(s/φ) + C(ν)ν + Dν
//! ```

use nalgebra::Vector3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_loop::{simulate, Controller, LoopConfig, LoopError, Maneuver};
use crate::dynamics::{hydrodynamic_load, rotation, GeneralizedForce, ShipState, VesselParams};
use crate::reference::DesiredPose;

/// Per-axis gains for `[x, y, ψ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmcGains {
    /// Surface slope Λ (1/s).
    pub lambda: [f64; 3],
    /// Switching gain K (N, N, N·m).
    pub k: [f64; 3],
    /// Boundary-layer width φ (m/s, m/s, rad/s).
    pub phi: [f64; 3],
    /// Feed forward `C(ν)ν + Dν`; pure switching when false.
    pub compensate_model: bool,
}

// Heading: K/φ ≈ 27 N·m per rad/s against Iz = 20 with λ = 0.5 gives a
// well-damped yaw loop inside the ≈0.24 N·m pure-yaw authority.
// Position: inside the layer each axis closes as m·ë = −(K/φ)(ė + λe), which
// is critically damped or better when K/(φ·m) ≥ 4λ (surge 10/19, sway
// 17/35.2, both ≥ 0.4), so a pushed-off vessel returns without overshoot.
impl Default for SmcGains {
    fn default() -> Self {
        Self {
            lambda: [0.1, 0.1, 0.5],
            k: [0.6, 0.6, 0.2],
            phi: [0.06, 0.035, 0.0075],
            compensate_model: true,
        }
    }
}

impl SmcGains {
    pub fn validate(&self) -> Result<(), TeacherError> {
        let ok = |a: &[f64; 3]| a.iter().all(|x| x.is_finite() && *x > 0.0);
        if !(ok(&self.lambda) && ok(&self.k) && ok(&self.phi)) {
            return Err(TeacherError::InvalidGains(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeacherError {
    #[error("sliding-mode gains must be strictly positive: {0:?}")]
    InvalidGains(SmcGains),
    #[error("gain search needs at least one scenario")]
    NoScenarios,
    #[error("gain search space is empty")]
    EmptySearchSpace,
    #[error("no candidate kept the maximum heading error within {limit_deg}° (best was {best_deg:.3}°)")]
    SearchFailed { limit_deg: f64, best_deg: f64 },
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// Earth-frame pose error and error rate.
pub fn tracking_errors(state: &ShipState, desired: &DesiredPose) -> (Vector3<f64>, Vector3<f64>) {
    let e = desired.eta.to_vector() - state.eta.to_vector();
    let e_dot = desired.eta_dot.to_vector() - rotation(state.eta.psi) * state.nu.to_vector();
    (e, e_dot)
}

pub fn smc_control(state: &ShipState, desired: &DesiredPose, gains: &SmcGains, p: &VesselParams) -> GeneralizedForce {
    let (e, e_dot) = tracking_errors(state, desired);
    let mut switching = Vector3::zeros();
    for i in 0..3 {
        let s = e_dot[i] + gains.lambda[i] * e[i];
        switching[i] = gains.k[i] * (s / gains.phi[i]).tanh();
    }
    let mut tau = rotation(state.eta.psi).transpose() * switching;
    if gains.compensate_model {
        tau += hydrodynamic_load(state.nu, p);
    }
    GeneralizedForce::from_vector(&tau)
}

/// The sliding-mode law bound to a vessel model.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingMode {
    pub gains: SmcGains,
    pub vessel: VesselParams,
}

impl SlidingMode {
    pub fn new(gains: SmcGains, vessel: VesselParams) -> Result<Self, TeacherError> {
        gains.validate()?;
        Ok(Self { gains, vessel })
    }
}

impl Controller for SlidingMode {
    fn control(&mut self, state: &ShipState, desired: &DesiredPose) -> GeneralizedForce {
        smc_control(state, desired, &self.gains, &self.vessel)
    }
}

/// Candidate gain sets for the search.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchSpace {
    /// Cartesian product of the listed Λ, K and φ vectors.
    Grid {
        lambda: Vec<[f64; 3]>,
        k: Vec<[f64; 3]>,
        phi: Vec<[f64; 3]>,
        compensate_model: bool,
    },
    /// `samples` draws, log-uniform per axis between `low` and `high`.
    Random {
        low: SmcGains,
        high: SmcGains,
        samples: usize,
        seed: u64,
    },
}

impl SearchSpace {
    pub fn single(gains: SmcGains) -> Self {
        SearchSpace::Grid {
            lambda: vec![gains.lambda],
            k: vec![gains.k],
            phi: vec![gains.phi],
            compensate_model: gains.compensate_model,
        }
    }

    /// Grid that scales each default gain vector by the given factors.
    pub fn scaled_grid(base: SmcGains, lambda: &[f64], k: &[f64], phi: &[f64]) -> Self {
        let scale = |v: [f64; 3], f: &[f64]| f.iter().map(|s| v.map(|x| x * s)).collect();
        SearchSpace::Grid {
            lambda: scale(base.lambda, lambda),
            k: scale(base.k, k),
            phi: scale(base.phi, phi),
            compensate_model: base.compensate_model,
        }
    }

    pub fn candidates(&self) -> Vec<SmcGains> {
        match self {
            SearchSpace::Grid {
                lambda,
                k,
                phi,
                compensate_model,
            } => {
                let mut out = Vec::with_capacity(lambda.len() * k.len() * phi.len());
                for l in lambda {
                    for kk in k {
                        for p in phi {
                            out.push(SmcGains {
                                lambda: *l,
                                k: *kk,
                                phi: *p,
                                compensate_model: *compensate_model,
                            });
                        }
                    }
                }
                out
            }
            SearchSpace::Random { low, high, samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let draw = |lo: [f64; 3], hi: [f64; 3], rng: &mut ChaCha8Rng| {
                    let mut v = [0.0; 3];
                    for i in 0..3 {
                        let (a, b) = (lo[i].min(hi[i]).ln(), lo[i].max(hi[i]).ln());
                        v[i] = if a == b { lo[i] } else { rng.random_range(a..b).exp() };
                    }
                    v
                };
                (0..*samples)
                    .map(|_| SmcGains {
                        lambda: draw(low.lambda, high.lambda, &mut rng),
                        k: draw(low.k, high.k, &mut rng),
                        phi: draw(low.phi, high.phi, &mut rng),
                        compensate_model: low.compensate_model,
                    })
                    .collect()
            }
        }
    }
}

/// Weights of the tuning cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneObjective {
    /// Weight on `∫‖τ‖² dt` relative to `∫(ψ_d − ψ)² dt`.
    pub effort_weight: f64,
    /// Cost added per saturated sample.
    pub saturation_penalty: f64,
    /// Qualifying bound on the maximum heading error (deg).
    pub max_heading_error_deg: f64,
}

impl Default for TuneObjective {
    fn default() -> Self {
        Self {
            effort_weight: 1e-6,
            saturation_penalty: 1e-3,
            max_heading_error_deg: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateScore {
    pub gains: SmcGains,
    pub cost: f64,
    pub heading_ise: f64,
    pub effort: f64,
    pub saturated_samples: usize,
    pub max_heading_error_deg: f64,
    /// False if the run diverged or broke the heading bound.
    pub qualified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub gains: SmcGains,
    pub cost: f64,
    pub scores: Vec<CandidateScore>,
}

fn score(cfg: &LoopConfig, scenarios: &[Maneuver], gains: SmcGains, obj: &TuneObjective) -> CandidateScore {
    let h = cfg.timestep;
    let mut ise = 0.0;
    let mut effort = 0.0;
    let mut saturated = 0;
    let mut max_err: f64 = 0.0;
    let mut diverged = false;
    for m in scenarios {
        let ctrl = SlidingMode {
            gains,
            vessel: cfg.vessel.clone(),
        };
        let run = simulate(cfg, m, ctrl, |s| {
            let err = s.desired.eta.psi - s.state.eta.psi;
            ise += err * err * h;
            effort += s.tau_demand.to_vector().norm_squared() * h;
            saturated += s.saturated as usize;
            max_err = max_err.max(err.abs());
        });
        if run.is_err() {
            diverged = true;
            break;
        }
    }
    let max_heading_error_deg = max_err.to_degrees();
    let qualified = !diverged && max_heading_error_deg <= obj.max_heading_error_deg;
    let cost = if diverged {
        f64::INFINITY
    } else {
        ise + obj.effort_weight * effort + obj.saturation_penalty * saturated as f64
    };
    CandidateScore {
        gains,
        cost,
        heading_ise: ise,
        effort,
        saturated_samples: saturated,
        max_heading_error_deg,
        qualified,
    }
}

/// Evaluates every candidate in `space` on `scenarios` and returns the
/// cheapest qualifying one. Ties resolve to the earliest candidate.
pub fn tune_smc(
    cfg: &LoopConfig,
    scenarios: &[Maneuver],
    space: &SearchSpace,
    obj: &TuneObjective,
) -> Result<TuneResult, TeacherError> {
    if scenarios.is_empty() {
        return Err(TeacherError::NoScenarios);
    }
    for m in scenarios {
        m.validate()?;
    }
    let candidates = space.candidates();
    if candidates.is_empty() {
        return Err(TeacherError::EmptySearchSpace);
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for g in candidates {
        if g.validate().is_err() {
            continue;
        }
        scores.push(score(cfg, scenarios, g, obj));
    }
    let best = scores
        .iter()
        .filter(|s| s.qualified)
        .min_by(|a, b| a.cost.total_cmp(&b.cost));
    match best {
        Some(b) => Ok(TuneResult {
            gains: b.gains,
            cost: b.cost,
            scores: scores.clone(),
        }),
        None => Err(TeacherError::SearchFailed {
            limit_deg: obj.max_heading_error_deg,
            best_deg: scores
                .iter()
                .map(|s| s.max_heading_error_deg)
                .fold(f64::INFINITY, f64::min),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BodyVelocity, EarthPose};

    fn at_rest_desired(eta: EarthPose) -> DesiredPose {
        DesiredPose {
            eta,
            eta_dot: EarthPose::ORIGIN,
        }
    }

    #[test]
    fn zero_error_at_rest_gives_zero_force() {
        let s = ShipState::default();
        let tau = smc_control(&s, &at_rest_desired(EarthPose::ORIGIN), &SmcGains::default(), &VesselParams::default());
        assert_eq!(tau, GeneralizedForce::ZERO);
    }

    #[test]
    fn pure_heading_error_is_yaw_only() {
        let g = SmcGains::default();
        let d_psi = 0.01;
        let s = ShipState::default();
        let tau = smc_control(&s, &at_rest_desired(EarthPose::new(0.0, 0.0, d_psi)), &g, &VesselParams::default());
        assert_eq!(tau.tau_x, 0.0);
        assert_eq!(tau.tau_y, 0.0);
        let want = g.k[2] * (g.lambda[2] * d_psi / g.phi[2]).tanh();
        assert!((tau.tau_n - want).abs() < 1e-15);
    }

    #[test]
    fn compensation_switch_adds_hydrodynamic_load() {
        let nu = BodyVelocity::new(0.3, -0.1, 0.05);
        let s = ShipState::new(nu, EarthPose::new(0.0, 0.0, 0.4));
        let d = DesiredPose {
            eta: EarthPose::new(0.1, 0.0, 0.45),
            eta_dot: EarthPose::new(0.2, 0.1, 0.0),
        };
        let p = VesselParams::default();
        let mut g = SmcGains::default();
        let with = smc_control(&s, &d, &g, &p).to_vector();
        g.compensate_model = false;
        let without = smc_control(&s, &d, &g, &p).to_vector();
        assert!((with - without - hydrodynamic_load(nu, &p)).amax() < 1e-14);
    }

    #[test]
    fn invalid_gains_rejected() {
        let mut g = SmcGains::default();
        g.phi[1] = 0.0;
        assert!(SlidingMode::new(g, VesselParams::default()).is_err());
    }

    #[test]
    fn random_space_is_seeded() {
        let lo = SmcGains::default();
        let mut hi = lo;
        hi.k = hi.k.map(|k| 2.0 * k);
        let a = SearchSpace::Random { low: lo, high: hi, samples: 5, seed: 3 }.candidates();
        let b = SearchSpace::Random { low: lo, high: hi, samples: 5, seed: 3 }.candidates();
        assert_eq!(a, b);
        assert!(a.iter().all(|g| g.lambda == lo.lambda && (0..3).all(|i| g.k[i] >= lo.k[i] && g.k[i] <= hi.k[i])));
    }

    #[test]
    fn grid_is_cartesian_product() {
        let space = SearchSpace::scaled_grid(SmcGains::default(), &[0.5, 1.0], &[1.0, 2.0, 3.0], &[1.0]);
        assert_eq!(space.candidates().len(), 6);
    }

    #[test]
    fn empty_inputs_rejected() {
        let cfg = LoopConfig::default();
        let space = SearchSpace::single(SmcGains::default());
        assert!(matches!(
            tune_smc(&cfg, &[], &space, &TuneObjective::default()),
            Err(TeacherError::NoScenarios)
        ));
    }
}
