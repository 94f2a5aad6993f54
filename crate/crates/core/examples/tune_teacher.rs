// Grid search over sliding-mode gains: integral-squared heading error plus
// a small effort penalty on the course change.

use neuropilot::closed_loop::{Command, LoopConfig, Maneuver};
use neuropilot::teacher::{tune_smc, SearchSpace, TuneObjective};
use neuropilot::{BodyVelocity, EarthPose, ShipState, SmcGains};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LoopConfig::default();
    let step = Maneuver {
        initial: ShipState::new(BodyVelocity::new(0.2, 0.0, 0.0), EarthPose::ORIGIN),
        schedule: vec![Command::heading(10.0, 20f64.to_radians())],
        duration: 80.0,
        transit_speed: 0.2,
        reference_start: None,
    };
    let space = SearchSpace::scaled_grid(SmcGains::default(), &[0.5, 1.0, 2.0], &[0.5, 1.0], &[0.5, 1.0, 2.0]);
    let result = tune_smc(&cfg, &[step], &space, &TuneObjective::default())?;
    for s in &result.scores {
        println!(
            "λψ = {:.3}  Kψ = {:.3}  φψ = {:.5}  cost {:.4e}  max error {:.3}°{}",
            s.gains.lambda[2],
            s.gains.k[2],
            s.gains.phi[2],
            s.cost,
            s.max_heading_error_deg,
            if s.qualified { "" } else { "  (rejected)" }
        );
    }
    println!("best: {:?} at cost {:.4e}", result.gains, result.cost);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
