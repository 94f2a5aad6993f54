//! Step-response and actuator metrics computed from a run record.

use serde::Serialize;

use super::record::RunRecord;
use super::HarnessError;

/// Track displacement below this is treated as stationary (m).
const MIN_TRACK_LENGTH_M: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub max_heading_error_deg: f64,
    pub final_heading_error_deg: f64,
    pub max_heading_rate_error_deg_s: f64,
    pub final_heading_rate_error_deg_s: f64,
    /// Excursion of ψ past the final desired heading, in the step direction.
    pub overshoot_deg: f64,
    pub overshoot_pct: f64,
    /// Time after which ψ stays within 2 % of the step of its final value.
    pub settling_time_s: Option<f64>,
    pub max_thrust_fraction: f64,
    pub saturation_count: usize,
    /// Angle between the direction of travel over the final 20 % of the run
    /// and the final desired heading. `None` when the vessel is stationary.
    pub track_angle_deg: Option<f64>,
    /// Largest `|ψ − ψ_r|` over the final window.
    pub final_window_command_error_deg: f64,
    /// Largest `|r|` over the final window.
    pub final_window_yaw_rate_deg_s: f64,
    pub final_window_s: f64,
}

impl Metrics {
    /// `(name, value)` pairs in a fixed order; `None` becomes NaN.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("max_heading_error_deg", self.max_heading_error_deg),
            ("final_heading_error_deg", self.final_heading_error_deg),
            ("max_heading_rate_error_deg_s", self.max_heading_rate_error_deg_s),
            ("final_heading_rate_error_deg_s", self.final_heading_rate_error_deg_s),
            ("overshoot_deg", self.overshoot_deg),
            ("overshoot_pct", self.overshoot_pct),
            ("settling_time_s", self.settling_time_s.unwrap_or(f64::NAN)),
            ("max_thrust_fraction", self.max_thrust_fraction),
            ("saturation_count", self.saturation_count as f64),
            ("track_angle_deg", self.track_angle_deg.unwrap_or(f64::NAN)),
            ("final_window_command_error_deg", self.final_window_command_error_deg),
            ("final_window_yaw_rate_deg_s", self.final_window_yaw_rate_deg_s),
            ("final_window_s", self.final_window_s),
        ]
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "value"]).unwrap();
        for (k, v) in self.entries() {
            w.serialize((k, v)).unwrap();
        }
        w.into_inner().unwrap()
    }
}

fn wrap_deg(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

pub fn evaluate(record: &RunRecord, final_window_s: f64) -> Result<Metrics, HarnessError> {
    let rows = &record.rows;
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(HarnessError::EmptyRecord),
    };

    let max_abs = |f: &dyn Fn(&super::RecordRow) -> f64, rs: &[super::RecordRow]| rs.iter().map(f).fold(0.0, |m: f64, x| m.max(x.abs()));

    let target = last.psi_d_deg;
    let step = target - first.psi_deg;
    let (overshoot_deg, overshoot_pct, settling_time_s) = if step.abs() < 1e-9 {
        (0.0, 0.0, None)
    } else {
        let dir = step.signum();
        let over = rows.iter().map(|r| dir * (r.psi_deg - target)).fold(0.0, f64::max);
        let band = 0.02 * step.abs();
        let settling = match rows.iter().rposition(|r| (r.psi_deg - target).abs() > band) {
            None => Some(first.t_s),
            Some(i) if i + 1 < rows.len() => Some(rows[i + 1].t_s),
            Some(_) => None,
        };
        (over, 100.0 * over / step.abs(), settling)
    };

    let max_thrust_fraction = rows
        .iter()
        .map(|r| r.thrusts().iter().fold(0.0, |m: f64, f| m.max(f.abs())) / r.f_max_n)
        .fold(0.0, f64::max);

    let tail_start = rows.len() - (rows.len() / 5).max(2).min(rows.len());
    let tail = &rows[tail_start..];
    let (dx, dy) = (last.x_m - tail[0].x_m, last.y_m - tail[0].y_m);
    let track_angle_deg = if dx.hypot(dy) < MIN_TRACK_LENGTH_M {
        None
    } else {
        Some(wrap_deg(dy.atan2(dx).to_degrees() - last.psi_d_deg).abs())
    };

    let window_start = last.t_s - final_window_s;
    let window: Vec<_> = rows.iter().filter(|r| r.t_s >= window_start - 1e-9).copied().collect();

    Ok(Metrics {
        max_heading_error_deg: max_abs(&|r| r.heading_error_deg, rows),
        final_heading_error_deg: last.heading_error_deg.abs(),
        max_heading_rate_error_deg_s: max_abs(&|r| r.heading_rate_error_deg_s, rows),
        final_heading_rate_error_deg_s: last.heading_rate_error_deg_s.abs(),
        overshoot_deg,
        overshoot_pct,
        settling_time_s,
        max_thrust_fraction,
        saturation_count: rows.iter().filter(|r| r.saturated != 0).count(),
        track_angle_deg,
        final_window_command_error_deg: max_abs(&|r| r.psi_deg - r.psi_r_deg, &window),
        final_window_yaw_rate_deg_s: max_abs(&|r| r.r_deg_s, &window),
        final_window_s,
    })
}

#[cfg(test)]
mod tests {
    use super::super::record::RecordRow;
    use super::*;

    fn row(t: f64, psi: f64, psi_d: f64) -> RecordRow {
        RecordRow {
            t_s: t,
            x_m: 0.2 * t * psi_d.to_radians().cos(),
            y_m: 0.2 * t * psi_d.to_radians().sin(),
            psi_deg: psi,
            u_m_s: 0.2,
            v_m_s: 0.0,
            r_deg_s: 0.0,
            psi_r_deg: psi_d,
            x_d_m: 0.0,
            y_d_m: 0.0,
            psi_d_deg: psi_d,
            psi_d_dot_deg_s: 0.0,
            heading_error_deg: psi - psi_d,
            heading_rate_error_deg_s: 0.0,
            tau_x_n: 0.0,
            tau_y_n: 0.0,
            tau_n_n_m: 0.0,
            f1_n: 0.5,
            f2_n: -1.0,
            f3_n: 0.0,
            f4_n: 0.0,
            f_max_n: 2.0,
            saturated: 0,
        }
    }

    fn perfect(n: usize) -> RunRecord {
        RunRecord {
            rows: (0..n).map(|i| row(i as f64 * 0.1, 20.0, 20.0)).collect(),
        }
    }

    #[test]
    fn perfect_tracking_has_zero_errors() {
        let m = evaluate(&perfect(200), 10.0).unwrap();
        assert_eq!(m.max_heading_error_deg, 0.0);
        assert_eq!(m.max_heading_rate_error_deg_s, 0.0);
        assert_eq!(m.final_window_command_error_deg, 0.0);
        assert_eq!(m.saturation_count, 0);
        assert!(m.track_angle_deg.unwrap() < 1e-9);
        assert_eq!(m.max_thrust_fraction, 0.5);
    }

    #[test]
    fn constant_offset_is_the_max_error() {
        let mut rec = perfect(100);
        for r in &mut rec.rows {
            r.psi_deg += 0.4;
            r.heading_error_deg = r.psi_deg - r.psi_d_deg;
        }
        let m = evaluate(&rec, 10.0).unwrap();
        assert!((m.max_heading_error_deg - 0.4).abs() < 1e-12);
    }

    #[test]
    fn saturation_count_matches_flags() {
        let mut rec = perfect(50);
        for i in [3, 7, 8, 40] {
            rec.rows[i].saturated = 1;
        }
        assert_eq!(evaluate(&rec, 1.0).unwrap().saturation_count, 4);
    }

    #[test]
    fn step_overshoot_and_settling() {
        // 0 → 10° with a 1° overshoot peak, then settled from t = 3 s
        let psis = [0.0, 5.0, 11.0, 10.5, 10.1, 10.0, 10.0];
        let rec = RunRecord {
            rows: psis.iter().enumerate().map(|(i, &p)| row(i as f64, p, 10.0)).collect(),
        };
        let m = evaluate(&rec, 2.0).unwrap();
        assert!((m.overshoot_deg - 1.0).abs() < 1e-12);
        assert!((m.overshoot_pct - 10.0).abs() < 1e-9);
        assert_eq!(m.settling_time_s, Some(4.0));
    }

    #[test]
    fn stationary_vessel_has_no_track_angle() {
        let mut rec = perfect(50);
        for r in &mut rec.rows {
            r.x_m = 1.0;
            r.y_m = 2.0;
        }
        assert_eq!(evaluate(&rec, 1.0).unwrap().track_angle_deg, None);
    }

    #[test]
    fn empty_record_is_an_error() {
        assert!(matches!(evaluate(&RunRecord::default(), 1.0), Err(HarnessError::EmptyRecord)));
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(359.5), -0.5);
    }
}
