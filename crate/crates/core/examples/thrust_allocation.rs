// Maps a generalized force onto the four azimuth thrusters and back, then
// shows what magnitude clipping and slew limiting do to a large demand.

use neuropilot::allocation::FIXED_AZIMUTHS;
use neuropilot::{Allocator, GeneralizedForce, ThrusterCommand, ThrusterLayout};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let alloc = Allocator::new(FIXED_AZIMUTHS, ThrusterLayout::default())?;
    println!("H(α) at α = (π, π, π/2, π/2):{}", alloc.matrix());

    let tau = GeneralizedForce::new(1.0, 0.5, 0.1);
    let f = alloc.unconstrained(tau);
    let back = alloc.tau_of(&f);
    println!("τ = {tau:?}\nf = {f:.4?}\nH·f = {back:?}");

    // a surge demand far beyond 2 N per thruster, starting from idle
    let big = GeneralizedForce::new(10.0, 0.0, 0.0);
    let mut prev = ThrusterCommand::idle(FIXED_AZIMUTHS);
    for k in 0..3 {
        let a = alloc.allocate(big, &prev, 0.01)?;
        println!("step {k}: f = {:.3?} saturated = {}", a.command.f, a.saturated);
        prev = a.command;
    }
    let settled = alloc.clipped(big);
    println!("clip only: f = {:.3?}, produces {:?}", settled.command.f, alloc.tau_of(&settled.command.f));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
