// The full course-change experiment: gate the teacher, clone it, fly the
// clone, and print every check. Artifacts go to the directory given as the
// first argument, or a temporary one.

use std::path::Path;

use neuropilot::harness::reproduce_paper;
use neuropilot::Config;

fn run_into(keep: Option<&Path>) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = Config::default();
    let r = reproduce_paper(&cfg)?;
    let dir = match keep {
        Some(d) => d.to_path_buf(),
        None => std::env::temp_dir().join(format!("neuropilot-repro-{}", std::process::id())),
    };
    r.write_outputs(&dir)?;
    println!("{} demonstrations, best epoch {}", r.dataset_size, r.training.best_epoch);
    print!("{}", r.table());
    if keep.is_none() {
        std::fs::remove_dir_all(&dir)?;
    }
    if !r.passed() {
        return Err("some checks failed".into());
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run_into(None)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(std::path::PathBuf::from);
    run_into(dir.as_deref())
}
