// Holding station: the vessel is pushed 1 m off a settled setpoint and the
// sliding-mode controller brings it back without overshoot.

use neuropilot::closed_loop::{simulate, Command, LoopConfig, Maneuver};
use neuropilot::{BodyVelocity, EarthPose, ShipState, SlidingMode, SmcGains};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = LoopConfig::default();
    let m = Maneuver {
        initial: ShipState::new(BodyVelocity::ZERO, EarthPose::new(0.6, -0.8, 0.0)),
        schedule: vec![Command::pose(0.0, 0.0, 0.0, 0.0)],
        duration: 120.0,
        transit_speed: 0.0,
        reference_start: Some(EarthPose::ORIGIN),
    };
    let teacher = SlidingMode::new(SmcGains::default(), cfg.vessel.clone())?;
    let mut last = f64::INFINITY;
    let mut rises = 0;
    simulate(&cfg, &m, teacher, |s| {
        let d = s.state.eta.x.hypot(s.state.eta.y);
        rises += (d > last) as usize;
        if (s.state.t % 20.0).abs() < 1e-9 {
            println!("t = {:5.1} s  |position error| = {:.4} m  ψ = {:+.4}°", s.state.t, d, s.state.eta.psi.to_degrees());
        }
        last = d;
    })?;
    println!("final offset {last:.5} m, steps where the offset grew: {rises}");
    if rises > 0 {
        return Err("offset is not monotone".into());
    }
    if last >= 0.02 {
        return Err(format!("station not regained: {last} m").into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
