//! CSV tables that are not run records: demonstration pools (features and
//! target first, then the state and reference each sample was taken from)
//! and gain-search results.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, write_atomic, HarnessError};
use crate::dynamics::{BodyVelocity, EarthPose, GeneralizedForce, ShipState};
use crate::neurocontrol::{SampleOrigin, TrainingSample};
use crate::reference::DesiredPose;
use crate::teacher::CandidateScore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub e_x_m: f64,
    pub e_y_m: f64,
    pub e_psi_rad: f64,
    pub e_psi_dot_rad_s: f64,
    pub u_m_s: f64,
    pub v_m_s: f64,
    pub r_rad_s: f64,
    pub tau_x_n: f64,
    pub tau_y_n: f64,
    pub tau_n_n_m: f64,
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub psi_rad: f64,
    pub x_d_m: f64,
    pub y_d_m: f64,
    pub psi_d_rad: f64,
    pub x_d_dot_m_s: f64,
    pub y_d_dot_m_s: f64,
    pub psi_d_dot_rad_s: f64,
}

impl From<&TrainingSample> for DatasetRow {
    fn from(s: &TrainingSample) -> Self {
        let [e_x_m, e_y_m, e_psi_rad, e_psi_dot_rad_s, u_m_s, v_m_s, r_rad_s] = s.features;
        let (st, d) = (&s.origin.state, &s.origin.desired);
        Self {
            e_x_m,
            e_y_m,
            e_psi_rad,
            e_psi_dot_rad_s,
            u_m_s,
            v_m_s,
            r_rad_s,
            tau_x_n: s.target.tau_x,
            tau_y_n: s.target.tau_y,
            tau_n_n_m: s.target.tau_n,
            t_s: st.t,
            x_m: st.eta.x,
            y_m: st.eta.y,
            psi_rad: st.eta.psi,
            x_d_m: d.eta.x,
            y_d_m: d.eta.y,
            psi_d_rad: d.eta.psi,
            x_d_dot_m_s: d.eta_dot.x,
            y_d_dot_m_s: d.eta_dot.y,
            psi_d_dot_rad_s: d.eta_dot.psi,
        }
    }
}

impl From<DatasetRow> for TrainingSample {
    fn from(r: DatasetRow) -> Self {
        let mut state = ShipState::new(
            BodyVelocity::new(r.u_m_s, r.v_m_s, r.r_rad_s),
            EarthPose::new(r.x_m, r.y_m, r.psi_rad),
        );
        state.t = r.t_s;
        TrainingSample {
            features: [r.e_x_m, r.e_y_m, r.e_psi_rad, r.e_psi_dot_rad_s, r.u_m_s, r.v_m_s, r.r_rad_s],
            target: GeneralizedForce::new(r.tau_x_n, r.tau_y_n, r.tau_n_n_m),
            origin: SampleOrigin {
                state,
                desired: DesiredPose {
                    eta: EarthPose::new(r.x_d_m, r.y_d_m, r.psi_d_rad),
                    eta_dot: EarthPose::new(r.x_d_dot_m_s, r.y_d_dot_m_s, r.psi_d_dot_rad_s),
                },
            },
        }
    }
}

pub fn dataset_csv_bytes(samples: &[TrainingSample]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in samples {
        w.serialize(DatasetRow::from(s)).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn write_dataset(path: &Path, samples: &[TrainingSample]) -> Result<(), HarnessError> {
    write_atomic(path, &dataset_csv_bytes(samples)).map_err(io_err(path))
}

pub fn read_dataset(path: &Path) -> Result<Vec<TrainingSample>, HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for row in r.deserialize::<DatasetRow>() {
        let s = TrainingSample::from(row.map_err(csv_err)?);
        if !(s.features.iter().all(|x| x.is_finite()) && s.target.as_array().iter().all(|x| x.is_finite())) {
            return Err(HarnessError::Parse {
                path: path.display().to_string(),
                msg: format!("row {} holds a non-finite value", out.len() + 1),
            });
        }
        out.push(s);
    }
    Ok(out)
}

/// One row per candidate, gains spelled out per axis.
pub fn tuning_csv_bytes(scores: &[CandidateScore]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "lambda_x", "lambda_y", "lambda_psi", "k_x", "k_y", "k_psi", "phi_x", "phi_y", "phi_psi", "compensate_model",
        "cost", "heading_ise", "effort", "saturated_samples", "max_heading_error_deg", "qualified",
    ])
    .unwrap();
    for s in scores {
        let g = &s.gains;
        let mut rec: Vec<String> = g.lambda.iter().chain(&g.k).chain(&g.phi).map(|v| format!("{v:?}")).collect();
        rec.push(g.compensate_model.to_string());
        rec.extend([s.cost, s.heading_ise, s.effort].map(|v| format!("{v:?}")));
        rec.push(s.saturated_samples.to_string());
        rec.push(format!("{:?}", s.max_heading_error_deg));
        rec.push(s.qualified.to_string());
        w.write_record(&rec).unwrap();
    }
    w.into_inner().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_loop::LoopConfig;
    use crate::neurocontrol::{generate_dataset, Battery};
    use crate::teacher::SmcGains;

    #[test]
    fn csv_round_trip_is_exact() {
        let battery = Battery {
            heading_steps_deg: vec![15.0],
            perturbed_runs_per_step: 0,
            station_keeping_runs: 1,
            step_duration_s: 20.0,
            station_keeping_duration_s: 10.0,
            ..Battery::default()
        };
        let data = generate_dataset(&LoopConfig::default(), SmcGains::default(), &battery.maneuvers(), 0.5, battery.noise(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_dataset(&p, &data).unwrap();
        assert_eq!(read_dataset(&p).unwrap(), data);
    }
}
