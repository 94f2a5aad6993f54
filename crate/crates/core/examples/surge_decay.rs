// Free surge decay: the unforced vessel slows as `u(t) = u₀·e^(−d₁₁t/m₁₁)`,
// and its kinetic energy only ever falls.

use neuropilot::dynamics::step_rk4;
use neuropilot::{BodyVelocity, EarthPose, GeneralizedForce, ShipState, VesselParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = VesselParams::default();
    let h = 0.01;
    let u0 = 0.3;
    let mut s = ShipState::new(BodyVelocity::new(u0, 0.0, 0.0), EarthPose::ORIGIN);
    let mut energy = p.kinetic_energy(s.nu);
    for k in 1..=500 {
        s = step_rk4(&s, GeneralizedForce::ZERO, &p, h)?;
        let e = p.kinetic_energy(s.nu);
        assert!(e < energy, "energy rose at step {k}");
        energy = e;
        if k % 100 == 0 {
            let exact = u0 * (-6.3 / 19.0 * s.t).exp();
            println!("t = {:.1} s  u = {:.9} m/s  exact {:.9}  |Δ| = {:.1e}", s.t, s.nu.u, exact, (s.nu.u - exact).abs());
        }
    }
    println!("drifted {:.4} m ahead", s.eta.x);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
