use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use neuropilot::harness::config::{TeacherSection, CONFIG_ENV};
use neuropilot::harness::data::{read_dataset, tuning_csv_bytes, write_dataset};
use neuropilot::harness::{
    demonstrations, evaluate, reproduce_paper, run_scenario, tune_teacher, write_atomic, Config, ControllerKind,
    HarnessError, RunRecord, Scenario,
};
use neuropilot::neurocontrol::{train, weights};

#[derive(Parser)]
#[command(name = "neuropilot", version, about = "Vessel simulation, sliding-mode teacher and neural clone")]
struct Cli {
    /// TOML config; defaults apply to anything it leaves out.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the dataset and training seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the scenario's controller.
    #[arg(long, global = true, value_enum)]
    controller: Option<ControllerKind>,
    /// Integration step (s).
    #[arg(long, global = true, allow_negative_numbers = true)]
    timestep: Option<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file and write its record and metrics.
    Simulate {
        scenario: PathBuf,
        /// Weight file for the neural controller (overrides the scenario's).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Grid-search teacher gains on the course change.
    TuneTeacher,
    /// Log teacher demonstrations on the configured battery.
    GenData,
    /// Train the network on a demonstration CSV, or on fresh demonstrations.
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Teacher gate, cloning, and every course-change check.
    ReproducePaper,
    /// Convert run records to long-format CSV for plotting.
    PlotData {
        #[arg(required = true)]
        records: Vec<PathBuf>,
    },
}

enum Failure {
    Config(HarnessError),
    Run(HarnessError),
    Checks,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Parse { .. } => Failure::Config(e),
            e => Failure::Run(e),
        }
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|source| {
        Failure::Run(HarnessError::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

fn config(cli: &Cli) -> Result<Config, Failure> {
    // anything wrong with the file or its values is a config failure
    let mut cfg = Config::resolve(cli.config.as_deref()).map_err(Failure::Config)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(h) = cli.timestep {
        cfg.simulation.timestep_s = h;
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = config(cli)?;
    let out = &cli.out_dir;
    match &cli.command {
        Cmd::Simulate { scenario, weights } => {
            let mut s = Scenario::load(scenario)?;
            if let Some(k) = cli.controller {
                s.controller = k;
            }
            if cli.timestep.is_some() {
                s.timestep = None;
            }
            if let Some(w) = weights {
                s.weights_file = Some(w.clone());
            }
            let record = run_scenario(&s, &cfg, None)?;
            let m = evaluate(&record, cfg.step.final_window_s)?;
            write(&out.join(format!("{}.csv", s.name)), &record.to_csv_bytes())?;
            write(&out.join(format!("{}_metrics.csv", s.name)), &m.to_csv_bytes())?;
            for (k, v) in m.entries() {
                println!("{k:<32} {v:.6}");
            }
        }
        Cmd::TuneTeacher => {
            let r = tune_teacher(&cfg);
            let r = match r {
                Ok(r) => r,
                Err(e @ HarnessError::Teacher(_)) => {
                    eprintln!("error: {e}");
                    return Err(Failure::Checks);
                }
                Err(e) => return Err(e.into()),
            };
            write(&out.join("tuning_results.csv"), &tuning_csv_bytes(&r.scores))?;
            #[derive(Serialize)]
            struct Tuned {
                teacher: TeacherSection,
            }
            let toml = toml::to_string_pretty(&Tuned {
                teacher: TeacherSection::from_gains(&r.gains),
            })
            .expect("gains serialize");
            write(&out.join("tuned_gains.toml"), toml.as_bytes())?;
            println!("{} candidates, best cost {:.6e}", r.scores.len(), r.cost);
            print!("{toml}");
        }
        Cmd::GenData => {
            let data = demonstrations(&cfg)?;
            let p = out.join("dataset.csv");
            write_dataset(&p, &data)?;
            println!("{} samples -> {}", data.len(), p.display());
        }
        Cmd::Train { data } => {
            let data = match data {
                Some(p) => read_dataset(p)?,
                None => demonstrations(&cfg)?,
            };
            let outcome = match train(&data, &cfg.training) {
                Ok(o) => o,
                Err(e @ neuropilot::neurocontrol::TrainError::NonConvergence { .. }) => {
                    eprintln!("error: {e}");
                    return Err(Failure::Checks);
                }
                Err(e) => return Err(HarnessError::from(e).into()),
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            for e in &outcome.history {
                w.serialize(e).expect("in-memory csv write");
            }
            write(&out.join("training_history.csv"), &w.into_inner().expect("in-memory csv flush"))?;
            weights::save(&outcome.net, &out.join("mlp_weights.txt")).map_err(HarnessError::from)?;
            println!(
                "{} train / {} validation samples, best epoch {}, validation RMSE / std {:?}",
                outcome.train_size, outcome.validation_size, outcome.best_epoch, outcome.validation_rmse
            );
        }
        Cmd::ReproducePaper => {
            let r = reproduce_paper(&cfg)?;
            r.write_outputs(out)?;
            print!("{}", r.table());
            if !r.passed() {
                return Err(Failure::Checks);
            }
        }
        Cmd::PlotData { records } => {
            for p in records {
                let rec = RunRecord::read_csv(p)?;
                let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("record");
                let dest = out.join(format!("{stem}_tidy.csv"));
                write(&dest, &rec.to_tidy_csv_bytes())?;
                println!("{}", dest.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
