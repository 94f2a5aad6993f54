// Behavior cloning end to end on a reduced battery: log teacher
// demonstrations, train the 7-10-3 network, save and reload its weights,
// and fly it on the course change next to the teacher.

use neuropilot::harness::{evaluate, run_scenario, ControllerKind, Scenario};
use neuropilot::neurocontrol::{generate_dataset, train, weights, Battery};
use neuropilot::Config;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = Config::default();
    cfg.dataset = Battery {
        heading_steps_deg: vec![5.0, 10.0, 20.0, 30.0, 40.0],
        station_keeping_runs: 8,
        ..Battery::default()
    };
    cfg.training.max_epochs = 150;
    let lc = cfg.loop_config()?;
    let data = generate_dataset(
        &lc,
        cfg.teacher.gains(),
        &cfg.dataset.maneuvers(),
        cfg.dataset.sampling_period_s,
        cfg.dataset.noise(),
        cfg.dataset.seed,
    )?;
    println!("{} demonstrations", data.len());

    // the gate is reported below rather than enforced here
    let mut hp = cfg.training.clone();
    hp.rmse_threshold = f64::MAX;
    let out = train(&data, &hp)?;
    println!("best epoch {} of {}, validation RMSE / std {:.4?}", out.best_epoch, hp.max_epochs, out.validation_rmse);

    let dir = std::env::temp_dir().join(format!("neuropilot-clone-{}", std::process::id()));
    let path = dir.join("mlp_weights.txt");
    weights::save(&out.net, &path)?;
    let net = weights::load(&path)?;
    assert_eq!(net, out.net);
    std::fs::remove_dir_all(&dir)?;

    let teacher = run_scenario(&Scenario::course_change(&cfg, ControllerKind::Teacher), &cfg, None)?;
    let neural = run_scenario(&Scenario::course_change(&cfg, ControllerKind::Neural), &cfg, Some(&net))?;
    let gap = teacher
        .rows
        .iter()
        .zip(&neural.rows)
        .map(|(a, b)| (a.psi_deg - b.psi_deg).abs())
        .fold(0.0, f64::max);
    let (mt, mn) = (evaluate(&teacher, 10.0)?, evaluate(&neural, 10.0)?);
    println!("max heading error: teacher {:.4}°, network {:.4}°", mt.max_heading_error_deg, mn.max_heading_error_deg);
    println!("largest heading difference between the two runs {gap:.4}°");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
