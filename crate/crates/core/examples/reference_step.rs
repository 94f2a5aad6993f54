// The critically damped heading reference: a 20° command is approached
// without overshoot and matches the closed-form step response.

use neuropilot::reference::critically_damped_step;
use neuropilot::{FilterParams, ReferenceModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = FilterParams::default();
    let mut m = ReferenceModel::new(params)?;
    let target = 20f64.to_radians();
    let h = 0.01;
    let mut peak: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for k in 1..=12_000 {
        let (psi_d, _) = m.step(target, h)?;
        let t = k as f64 * h;
        peak = peak.max(psi_d);
        worst_gap = worst_gap.max((psi_d - critically_damped_step(target, params.omega_n, t)).abs());
        if k % 2000 == 0 {
            println!("t = {t:5.1} s  ψ_d = {:8.4}°  ψ̇_d = {:7.4}°/s", psi_d.to_degrees(), m.rate().to_degrees());
        }
    }
    println!("ωn = {} rad/s, ζ = {}", params.omega_n, params.zeta);
    println!("overshoot {:.2e} rad, largest gap to closed form {:.2e} rad", peak - target, worst_gap);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
