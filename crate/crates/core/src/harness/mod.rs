//! Configuration, presets, persistence, and the `asl` command line.

mod checkpoint;
mod cli;
mod config;
mod presets;
mod report;
mod runner;

pub use checkpoint::{decode, encode, load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, MAGIC, VERSION};
pub use cli::{cli_main, Cli};
pub use config::{parse_config, parse_config_str, ParsedConfig};
pub use presets::{preset, ExperimentPreset, PresetId, PresetPlan, TrajectoryCheck};
pub use report::render_report;
pub use runner::{
    audit_file_name, execute_audits, execute_ball, execute_sweep, execute_trajectory, resume_trajectory, CheckResult,
    Outcome, RunSummary, RunOptions,
};

use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::evolution::EvolutionError;
use crate::laws::LawError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Physics(#[from] EvolutionError),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Diagnostics(DiagnosticsError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("strict mode: {0}")]
    Strict(String),
}

impl From<DiagnosticsError> for HarnessError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Evolution(e) => HarnessError::Physics(e),
            other => HarnessError::Diagnostics(other),
        }
    }
}

impl HarnessError {
    pub fn is_blow_up(&self) -> bool {
        matches!(
            self,
            HarnessError::Physics(EvolutionError::BlowUp { .. })
                | HarnessError::Diagnostics(DiagnosticsError::MemberFailed {
                    source: EvolutionError::BlowUp { .. },
                    ..
                })
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_blow_up() {
            EXIT_BLOWUP
        } else if matches!(self, HarnessError::Diagnostics(DiagnosticsError::NotAbsorbed { .. })) {
            EXIT_VERDICT
        } else {
            EXIT_USAGE
        }
    }
}
