//! TOML configuration. Every physical key carries its unit in its name and
//! unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, HarnessError};
use crate::allocation::{Allocator, ThrusterLayout, FIXED_AZIMUTHS};
use crate::closed_loop::LoopConfig;
use crate::dynamics::VesselParams;
use crate::neurocontrol::{Battery, Hyperparams};
use crate::reference::FilterParams;
use crate::teacher::{SearchSpace, SmcGains, TuneObjective};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "NEUROPILOT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub simulation: SimulationSection,
    pub vessel: VesselSection,
    pub thrusters: ThrusterSection,
    pub reference: ReferenceSection,
    pub teacher: TeacherSection,
    pub tuning: TuningSection,
    pub dataset: Battery,
    pub training: Hyperparams,
    pub step: StepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub timestep_s: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self { timestep_s: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VesselSection {
    pub mass_surge_kg: f64,
    pub mass_sway_kg: f64,
    pub inertia_yaw_kg_m2: f64,
    pub damping_surge_n_s_m: f64,
    pub damping_sway_n_s_m: f64,
    pub damping_yaw_n_m_s: f64,
}

impl Default for VesselSection {
    fn default() -> Self {
        Self {
            mass_surge_kg: 19.0,
            mass_sway_kg: 35.2,
            inertia_yaw_kg_m2: 20.0,
            damping_surge_n_s_m: 6.3,
            damping_sway_n_s_m: 7.0,
            damping_yaw_n_m_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThrusterSection {
    pub moment_arms_m: [f64; 4],
    pub phase_shifts_rad: [f64; 2],
    pub azimuths_rad: [f64; 4],
    pub f_max_n: f64,
    pub f_rate_max_n_s: f64,
}

impl Default for ThrusterSection {
    fn default() -> Self {
        let l = ThrusterLayout::default();
        Self {
            moment_arms_m: l.moment_arms,
            phase_shifts_rad: l.phase_shifts,
            azimuths_rad: FIXED_AZIMUTHS,
            f_max_n: l.f_max,
            f_rate_max_n_s: l.f_rate_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    pub omega_n_rad_s: f64,
    pub zeta: f64,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        let f = FilterParams::default();
        Self {
            omega_n_rad_s: f.omega_n,
            zeta: f.zeta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeacherSection {
    pub lambda_x_per_s: f64,
    pub lambda_y_per_s: f64,
    pub lambda_psi_per_s: f64,
    pub k_x_n: f64,
    pub k_y_n: f64,
    pub k_psi_n_m: f64,
    pub phi_x_m_s: f64,
    pub phi_y_m_s: f64,
    pub phi_psi_rad_s: f64,
    pub compensate_model: bool,
}

impl Default for TeacherSection {
    fn default() -> Self {
        Self::from_gains(&SmcGains::default())
    }
}

impl TeacherSection {
    pub fn from_gains(g: &SmcGains) -> Self {
        Self {
            lambda_x_per_s: g.lambda[0],
            lambda_y_per_s: g.lambda[1],
            lambda_psi_per_s: g.lambda[2],
            k_x_n: g.k[0],
            k_y_n: g.k[1],
            k_psi_n_m: g.k[2],
            phi_x_m_s: g.phi[0],
            phi_y_m_s: g.phi[1],
            phi_psi_rad_s: g.phi[2],
            compensate_model: g.compensate_model,
        }
    }

    pub fn gains(&self) -> SmcGains {
        SmcGains {
            lambda: [self.lambda_x_per_s, self.lambda_y_per_s, self.lambda_psi_per_s],
            k: [self.k_x_n, self.k_y_n, self.k_psi_n_m],
            phi: [self.phi_x_m_s, self.phi_y_m_s, self.phi_psi_rad_s],
            compensate_model: self.compensate_model,
        }
    }
}

/// Grid search around the configured teacher gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuningSection {
    pub lambda_scales: Vec<f64>,
    pub k_scales: Vec<f64>,
    pub phi_scales: Vec<f64>,
    pub effort_weight: f64,
    pub saturation_penalty: f64,
    pub max_heading_error_deg: f64,
}

impl Default for TuningSection {
    fn default() -> Self {
        let o = TuneObjective::default();
        Self {
            lambda_scales: vec![0.5, 1.0, 2.0],
            k_scales: vec![0.5, 1.0, 1.5],
            phi_scales: vec![0.5, 1.0, 2.0],
            effort_weight: o.effort_weight,
            saturation_penalty: o.saturation_penalty,
            max_heading_error_deg: o.max_heading_error_deg,
        }
    }
}

impl TuningSection {
    pub fn space(&self, base: SmcGains) -> SearchSpace {
        SearchSpace::scaled_grid(base, &self.lambda_scales, &self.k_scales, &self.phi_scales)
    }

    pub fn objective(&self) -> TuneObjective {
        TuneObjective {
            effort_weight: self.effort_weight,
            saturation_penalty: self.saturation_penalty,
            max_heading_error_deg: self.max_heading_error_deg,
        }
    }
}

/// The course-change experiment: straight running, then a heading step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSection {
    pub heading_deg: f64,
    pub step_time_s: f64,
    pub duration_s: f64,
    pub transit_speed_m_s: f64,
    /// Window at the end of the run used for steady-state checks (s).
    pub final_window_s: f64,
}

impl Default for StepSection {
    fn default() -> Self {
        Self {
            heading_deg: 20.0,
            step_time_s: 10.0,
            duration_s: 120.0,
            transit_speed_m_s: 0.2,
            final_window_s: 10.0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, HarnessError> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::Parse {
            path: origin.to_string(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// `path` if given, else the file named by `NEUROPILOT_CONFIG`, else
    /// built-in defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self, HarnessError> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn vessel_params(&self) -> Result<VesselParams, HarnessError> {
        let v = &self.vessel;
        Ok(VesselParams::new(
            [v.mass_surge_kg, v.mass_sway_kg, v.inertia_yaw_kg_m2],
            [v.damping_surge_n_s_m, v.damping_sway_n_s_m, v.damping_yaw_n_m_s],
        )?)
    }

    pub fn layout(&self) -> ThrusterLayout {
        let t = &self.thrusters;
        ThrusterLayout {
            moment_arms: t.moment_arms_m,
            phase_shifts: t.phase_shifts_rad,
            f_max: t.f_max_n,
            f_rate_max: t.f_rate_max_n_s,
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            omega_n: self.reference.omega_n_rad_s,
            zeta: self.reference.zeta,
        }
    }

    pub fn loop_config(&self) -> Result<LoopConfig, HarnessError> {
        let filter = self.filter_params();
        filter.validate()?;
        Ok(LoopConfig {
            vessel: self.vessel_params()?,
            allocator: Allocator::new(self.thrusters.azimuths_rad, self.layout())?,
            reference: filter,
            timestep: self.simulation.timestep_s,
        })
    }

    /// Checks every section, not only the ones a given command touches.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let h = self.simulation.timestep_s;
        if !(h.is_finite() && h > 0.0) {
            return Err(HarnessError::Config(format!("simulation.timestep_s must be positive, got {h}")));
        }
        self.loop_config()?;
        self.teacher.gains().validate()?;
        let s = &self.step;
        if !(s.duration_s > 0.0 && s.step_time_s >= 0.0 && s.step_time_s < s.duration_s) {
            return Err(HarnessError::Config(
                "step.step_time_s must lie in [0, step.duration_s) and the duration must be positive".into(),
            ));
        }
        if !(s.final_window_s > 0.0 && s.final_window_s < s.duration_s) {
            return Err(HarnessError::Config("step.final_window_s must lie in (0, step.duration_s)".into()));
        }
        if !(s.transit_speed_m_s.is_finite() && s.transit_speed_m_s >= 0.0 && s.heading_deg.is_finite()) {
            return Err(HarnessError::Config("step heading and transit speed must be finite".into()));
        }
        let d = &self.dataset;
        let steps = d.sampling_period_s / h;
        if !(d.sampling_period_s.is_finite() && steps >= 1.0 - 1e-9 && (steps - steps.round()).abs() <= 1e-9 * steps) {
            return Err(HarnessError::Config(format!(
                "dataset.sampling_period_s must be a whole multiple of the timestep {h}, got {}",
                d.sampling_period_s
            )));
        }
        if !(d.step_duration_s > d.step_time_s && d.station_keeping_duration_s > 0.0 && d.max_offset_m >= 0.0) {
            return Err(HarnessError::Config("dataset durations and offsets are inconsistent".into()));
        }
        if !(d.action_noise.iter().all(|a| a.is_finite() && *a >= 0.0) && d.action_noise_hold_s.is_finite() && d.action_noise_hold_s > 0.0) {
            return Err(HarnessError::Config("dataset action noise must be non-negative with a positive hold".into()));
        }
        let t = &self.tuning;
        if t.lambda_scales.is_empty() || t.k_scales.is_empty() || t.phi_scales.is_empty() {
            return Err(HarnessError::Config("tuning scale lists must not be empty".into()));
        }
        Ok(())
    }

    /// Applies a `--seed` override to every seeded stage.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.dataset.seed = seed;
        self.training.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = Config::default();
        c.validate().unwrap();
        let back = Config::from_toml(&c.to_toml(), "inline").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = Config::from_toml("[reference]\nomega_n_rad_s = 0.2\n", "inline").unwrap();
        assert_eq!(c.reference.omega_n_rad_s, 0.2);
        assert_eq!(c.reference.zeta, 1.0);
        assert_eq!(c.vessel, VesselSection::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Config::from_toml("[reference]\nomega_n = 0.2\n", "inline").unwrap_err();
        assert!(err.to_string().contains("omega_n"), "{err}");
        assert!(Config::from_toml("[bogus]\n", "inline").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "[reference]\nzeta = 0.5\n",
            "[simulation]\ntimestep_s = 0\n",
            "[thrusters]\nf_max_n = -1\n",
            "[thrusters]\nazimuths_rad = [3.14, 3.14, 0.0, 0.1]\n",
            "[teacher]\nk_psi_n_m = 0\n",
            "[vessel]\nmass_sway_kg = 0\n",
            "[step]\nstep_time_s = 500\n",
        ] {
            assert!(Config::from_toml(text, "inline").is_err(), "{text}");
        }
    }

    #[test]
    fn teacher_section_maps_to_gains() {
        let g = SmcGains::default();
        assert_eq!(TeacherSection::from_gains(&g).gains(), g);
    }
}
