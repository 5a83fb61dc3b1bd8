//! Fourier-multiplier constitutive laws `θ -> u` and their condition audits.

mod audit;
mod symbols;

pub use audit::{
    audit_condition, fixed_mode_convergence, fixed_probe, shell_of, shell_wavevectors,
    AuditSettings, ConditionAuditReport, ConditionId, FixedModeRate, NuSup, ShellSup,
};
pub use symbols::{
    compute_velocity, ipmb_symbol, mg_symbol, sqg_symbol, ConstitutiveLaw, LawKind, Parity,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("symbol is undefined at k = 0")]
    ZeroWavevector,
    #[error("MG symbol is singular at k = {0:?} (D(k) = 0 for nu = 0, k2 = k3 = 0)")]
    SingularSymbol(Vec<i64>),
    #[error("law is {law}-dimensional but the grid is {grid}-dimensional")]
    DimensionMismatch { law: usize, grid: usize },
    #[error("nu = {0} must be finite and nonnegative")]
    NegativeViscosity(f64),
    #[error("audit cutoff K = {0} is below 8")]
    AuditCutoffTooSmall(u32),
    #[error("no admissible nu values to audit")]
    EmptyNuList,
}
