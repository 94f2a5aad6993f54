//! Time series of one closed-loop run, in I/O units (degrees for angles).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, write_atomic, HarnessError};
use crate::closed_loop::StepLog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub psi_deg: f64,
    pub u_m_s: f64,
    pub v_m_s: f64,
    pub r_deg_s: f64,
    /// Operator heading command.
    pub psi_r_deg: f64,
    pub x_d_m: f64,
    pub y_d_m: f64,
    pub psi_d_deg: f64,
    pub psi_d_dot_deg_s: f64,
    /// `ψ − ψ_d`
    pub heading_error_deg: f64,
    /// `r − ψ̇_d`
    pub heading_rate_error_deg_s: f64,
    pub tau_x_n: f64,
    pub tau_y_n: f64,
    pub tau_n_n_m: f64,
    pub f1_n: f64,
    pub f2_n: f64,
    pub f3_n: f64,
    pub f4_n: f64,
    pub f_max_n: f64,
    pub saturated: u8,
}

impl RecordRow {
    pub fn from_log(log: &StepLog, psi_r: f64, f_max: f64) -> Self {
        let s = &log.state;
        let d = &log.desired;
        let f = log.command.f;
        Self {
            t_s: s.t,
            x_m: s.eta.x,
            y_m: s.eta.y,
            psi_deg: s.eta.psi.to_degrees(),
            u_m_s: s.nu.u,
            v_m_s: s.nu.v,
            r_deg_s: s.nu.r.to_degrees(),
            psi_r_deg: psi_r.to_degrees(),
            x_d_m: d.eta.x,
            y_d_m: d.eta.y,
            psi_d_deg: d.eta.psi.to_degrees(),
            psi_d_dot_deg_s: d.eta_dot.psi.to_degrees(),
            heading_error_deg: (s.eta.psi - d.eta.psi).to_degrees(),
            heading_rate_error_deg_s: (s.nu.r - d.eta_dot.psi).to_degrees(),
            tau_x_n: log.tau_demand.tau_x,
            tau_y_n: log.tau_demand.tau_y,
            tau_n_n_m: log.tau_demand.tau_n,
            f1_n: f[0],
            f2_n: f[1],
            f3_n: f[2],
            f4_n: f[3],
            f_max_n: f_max,
            saturated: log.saturated as u8,
        }
    }

    pub fn thrusts(&self) -> [f64; 4] {
        [self.f1_n, self.f2_n, self.f3_n, self.f4_n]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub rows: Vec<RecordRow>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("in-memory csv write");
        }
        w.into_inner().expect("in-memory csv flush")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        write_atomic(path, &self.to_csv_bytes()).map_err(io_err(path))
    }

    pub fn read_csv(path: &Path) -> Result<Self, HarnessError> {
        let mut r = csv::Reader::from_path(path).map_err(|source| HarnessError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let rows = r
            .deserialize()
            .collect::<Result<Vec<RecordRow>, _>>()
            .map_err(|source| HarnessError::Csv {
                path: path.display().to_string(),
                source,
            })?;
        Ok(Self { rows })
    }

    /// Long-format `(t_s, series, value)` table for external plotting.
    pub fn to_tidy_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t_s", "series", "value"]).unwrap();
        for r in &self.rows {
            let series: [(&str, f64); 12] = [
                ("psi_deg", r.psi_deg),
                ("psi_d_deg", r.psi_d_deg),
                ("heading_error_deg", r.heading_error_deg),
                ("heading_rate_error_deg_s", r.heading_rate_error_deg_s),
                ("r_deg_s", r.r_deg_s),
                ("x_m", r.x_m),
                ("y_m", r.y_m),
                ("x_d_m", r.x_d_m),
                ("y_d_m", r.y_d_m),
                ("tau_x_n", r.tau_x_n),
                ("tau_y_n", r.tau_y_n),
                ("tau_n_n_m", r.tau_n_n_m),
            ];
            for (name, v) in series {
                w.serialize((r.t_s, name, v)).unwrap();
            }
        }
        w.into_inner().unwrap()
    }
}
