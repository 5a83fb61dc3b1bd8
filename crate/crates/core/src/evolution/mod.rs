//! Time integration of `∂tθ + u·∇θ = −κΛ^γθ + S`.

mod config;
mod data;
mod sim;
mod stepper;

pub use config::{FieldSpec, Integrator, ModeSpec, SolverConfig, CFL_LIMIT};
pub use data::build_field;
pub use sim::{run, RunOutput, Simulation, BLOWUP_THRESHOLD};
pub use stepper::{EnergyBudget, MultistepHistory, StepState, Stepper};

use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;
use crate::laws::{LawError, LawKind};
use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("GammaOutOfRange: gamma = {0} must lie in (0,2]")]
    GammaOutOfRange(f64),
    #[error("kappa = {0} must be finite and nonnegative")]
    NegativeKappa(f64),
    #[error("nu = {0} must be finite and nonnegative")]
    NegativeNu(f64),
    #[error("law {law} needs d = {}, config has d = {d}", law.dim())]
    LawDimension { law: LawKind, d: usize },
    #[error("{0}")]
    InvalidConfig(String),
    #[error("CFL estimate {estimate:.3} exceeds {limit} (strict mode)")]
    CflViolation { estimate: f64, limit: f64 },
    #[error("non-finite value in the nonlinear term")]
    NonFinite,
    #[error("blow-up at t = {t}, step {step}: {reason}")]
    BlowUp {
        t: f64,
        step: u64,
        reason: String,
        records: Vec<DiagnosticsRecord>,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Law(#[from] LawError),
}
