//! Scenario files and the single-run entry point.
//!
//! ```toml
//! name = "step20"
//! controller = "teacher"       # teacher | neural | none
//! duration_s = 120.0
//! timestep_s = 0.01            # optional, overrides the config
//! seed = 1
//! transit_speed_m_s = 0.2
//! weights_file = "mlp.txt"     # required for `neural`, relative to this file
//!
//! [initial]
//! u_m_s = 0.2
//!
//! [[command]]
//! t_s = 10.0
//! heading_deg = 20.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::record::{RecordRow, RunRecord};
use super::{io_err, HarnessError};
use crate::closed_loop::{simulate, Command, Controller, Maneuver, NoControl};
use crate::dynamics::{BodyVelocity, EarthPose, ShipState};
use crate::neurocontrol::{MlpController, NeuralController};
use crate::teacher::SlidingMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Teacher,
    Neural,
    None,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub x_m: f64,
    pub y_m: f64,
    pub psi_deg: f64,
    pub u_m_s: f64,
    pub v_m_s: f64,
    pub r_deg_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEntry {
    pub t_s: f64,
    pub heading_deg: f64,
    #[serde(default)]
    pub x_m: Option<f64>,
    #[serde(default)]
    pub y_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub controller: ControllerKind,
    pub duration_s: f64,
    #[serde(default)]
    pub timestep_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub transit_speed_m_s: f64,
    #[serde(default)]
    pub weights_file: Option<PathBuf>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub command: Vec<CommandEntry>,
}

/// A fully resolved scenario in SI units and radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub maneuver: Maneuver,
    pub controller: ControllerKind,
    /// Overrides the config timestep when set (s).
    pub timestep: Option<f64>,
    pub seed: u64,
    pub weights_file: Option<PathBuf>,
}

impl Scenario {
    pub fn from_file_struct(f: ScenarioFile, base_dir: Option<&Path>) -> Result<Self, HarnessError> {
        let i = &f.initial;
        let initial = ShipState::new(
            BodyVelocity::new(i.u_m_s, i.v_m_s, i.r_deg_s.to_radians()),
            EarthPose::new(i.x_m, i.y_m, i.psi_deg.to_radians()),
        );
        let schedule = f
            .command
            .iter()
            .map(|c| Command {
                t: c.t_s,
                psi: c.heading_deg.to_radians(),
                x: c.x_m,
                y: c.y_m,
            })
            .collect();
        let maneuver = Maneuver {
            initial,
            schedule,
            duration: f.duration_s,
            transit_speed: f.transit_speed_m_s,
            reference_start: None,
        };
        maneuver.validate()?;
        if let Some(h) = f.timestep_s {
            if !(h.is_finite() && h > 0.0) {
                return Err(HarnessError::Config(format!("scenario timestep_s must be positive, got {h}")));
            }
        }
        let weights_file = f.weights_file.map(|p| match base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        });
        Ok(Self {
            name: f.name,
            maneuver,
            controller: f.controller,
            timestep: f.timestep_s,
            seed: f.seed,
            weights_file,
        })
    }

    pub fn from_toml(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<Self, HarnessError> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| HarnessError::Parse {
            path: origin.into(),
            msg: e.to_string(),
        })?;
        Self::from_file_struct(f, base_dir)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text, &path.display().to_string(), path.parent())
    }

    /// The configured course-change experiment.
    pub fn course_change(cfg: &Config, controller: ControllerKind) -> Self {
        let s = &cfg.step;
        Self {
            name: format!("step{}_{}", s.heading_deg, controller_name(controller)),
            maneuver: Maneuver {
                initial: ShipState::new(BodyVelocity::new(s.transit_speed_m_s, 0.0, 0.0), EarthPose::ORIGIN),
                schedule: vec![Command::heading(s.step_time_s, s.heading_deg.to_radians())],
                duration: s.duration_s,
                reference_start: None,
                transit_speed: s.transit_speed_m_s,
            },
            controller,
            timestep: None,
            seed: cfg.training.seed,
            weights_file: None,
        }
    }
}

pub fn controller_name(k: ControllerKind) -> &'static str {
    match k {
        ControllerKind::Teacher => "teacher",
        ControllerKind::Neural => "neural",
        ControllerKind::None => "none",
    }
}

/// Runs one scenario. A `neural` scenario uses `net` when given, otherwise
/// the scenario's weight file.
pub fn run_scenario(s: &Scenario, cfg: &Config, net: Option<&MlpController>) -> Result<RunRecord, HarnessError> {
    let mut lc = cfg.loop_config()?;
    if let Some(h) = s.timestep {
        lc.timestep = h;
    }
    let controller: Box<dyn Controller> = match s.controller {
        ControllerKind::None => Box::new(NoControl),
        ControllerKind::Teacher => Box::new(SlidingMode::new(cfg.teacher.gains(), lc.vessel.clone())?),
        ControllerKind::Neural => {
            let net = match (net, &s.weights_file) {
                (Some(n), _) => n.clone(),
                (None, Some(p)) => crate::neurocontrol::weights::load(p)?,
                (None, None) => return Err(HarnessError::MissingWeights(s.name.clone())),
            };
            if net.n_in != crate::neurocontrol::N_FEATURES || net.n_out != 3 {
                return Err(HarnessError::Config(format!(
                    "weight file describes a {}-{}-{} network; the controller needs 7 inputs and 3 outputs",
                    net.n_in, net.n_hidden, net.n_out
                )));
            }
            Box::new(NeuralController::new(net))
        }
    };
    let f_max = lc.allocator.layout().f_max;
    let mut rows = Vec::with_capacity((s.maneuver.duration / lc.timestep) as usize + 2);
    simulate(&lc, &s.maneuver, controller, |log| {
        let psi_r = s.maneuver.setpoint_at(log.state.t).psi;
        rows.push(RecordRow::from_log(log, psi_r, f_max));
    })?;
    Ok(RunRecord { rows })
}
