//! Scenario runner, run records, metrics and the end-to-end reproduction
//! battery.

pub mod config;
pub mod data;
pub mod metrics;
pub mod record;
pub mod reproduce;
pub mod scenario;

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::allocation::AllocationError;
use crate::closed_loop::LoopError;
use crate::dynamics::DynamicsError;
use crate::neurocontrol::weights::WeightFileError;
use crate::neurocontrol::TrainError;
use crate::reference::ReferenceError;
use crate::teacher::TeacherError;

pub use config::Config;
pub use metrics::{evaluate, Metrics};
pub use record::{RecordRow, RunRecord};
pub use reproduce::{demonstrations, reproduce_paper, tune_teacher, Check, Reproduction};
pub use scenario::{run_scenario, ControllerKind, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("csv {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("scenario `{0}` selects the neural controller but no trained weight file was provided")]
    MissingWeights(String),
    #[error(transparent)]
    WeightFile(#[from] WeightFileError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Teacher(#[from] TeacherError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("record is empty")]
    EmptyRecord,
}

impl From<DynamicsError> for HarnessError {
    fn from(e: DynamicsError) -> Self {
        HarnessError::Loop(e.into())
    }
}

impl From<AllocationError> for HarnessError {
    fn from(e: AllocationError) -> Self {
        HarnessError::Loop(e.into())
    }
}

impl From<ReferenceError> for HarnessError {
    fn from(e: ReferenceError) -> Self {
        HarnessError::Loop(e.into())
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
