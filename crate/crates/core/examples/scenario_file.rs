// Scenario files: a TOML description of the start state and command
// schedule, run here under the teacher, then exported as a run record and a
// long-format plotting table.

use neuropilot::harness::{evaluate, run_scenario, Scenario};
use neuropilot::Config;

const SCENARIO: &str = r#"
name = "zigzag"
controller = "teacher"
duration_s = 150.0
transit_speed_m_s = 0.2

[initial]
u_m_s = 0.2

[[command]]
t_s = 10.0
heading_deg = 15.0

[[command]]
t_s = 70.0
heading_deg = -15.0
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::default();
    let s = Scenario::from_toml(SCENARIO, "zigzag", None)?;
    let record = run_scenario(&s, &cfg, None)?;
    let m = evaluate(&record, cfg.step.final_window_s)?;
    println!("{}: {} rows, max heading error {:.4}°, saturated samples {}", s.name, record.len(), m.max_heading_error_deg, m.saturation_count);
    let csv = record.to_csv_bytes();
    let tidy = record.to_tidy_csv_bytes();
    let header = String::from_utf8_lossy(&csv);
    println!("{}", header.lines().next().unwrap_or_default());
    println!("record {} bytes, plotting table {} bytes", csv.len(), tidy.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
