// The sliding-mode controller on the 20° course change: checks it must pass
// before its behavior is used as training data.

use neuropilot::harness::reproduce::teacher_gate;
use neuropilot::Config;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::default();
    let (record, metrics, checks) = teacher_gate(&cfg)?;
    println!("{} samples over {} s", record.len(), cfg.step.duration_s);
    for (name, value) in metrics.entries() {
        println!("{name:<32} {value:.6}");
    }
    for c in &checks {
        println!("{}", c.line());
    }
    if checks.iter().any(|c| !c.passed) {
        return Err("teacher gate failed".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
