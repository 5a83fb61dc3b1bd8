//! Measured observables and shape checks on solver output.

mod checks;
mod convergence;
mod gevrey;
mod record;

pub use checks::{
    absorbing_ball_check, energy_residual_check, grad_growth_check, h_minus_one_norm, linf_boundedness_check,
    linf_plateau_scaling, uniform_nu_witness, AbsorbingBallReport, BallTrajectory, EnergyCheck, GradGrowthReport,
    LinfReport, PlateauScaling, UniformBoundReport,
};
pub use convergence::{convergence_study, ConvergenceCell, ConvergenceReport, RateFit, SweptParameter};
pub use gevrey::{
    check_radius_lower_bound, estimate_gevrey_radius, GevreyEstimate, RadiusVerdict, AMPLITUDE_FLOOR,
    LOG_TAU_TOLERANCE, MIN_SHELLS, PEAK_FRACTION,
};
pub use record::{csv_header, measure, write_csv, DiagnosticsRecord, SobolevValue};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::EvolutionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("InsufficientDecay: only {usable} usable shells (need {MIN_SHELLS})")]
    InsufficientDecay { usable: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error("run with {parameter} = {value} failed: {source}")]
    MemberFailed {
        parameter: String,
        value: f64,
        source: EvolutionError,
    },
    #[error("NotAbsorbed: trajectory at {multiplier}x the ball radius ended at |theta| = {final_l2:.4} > R = {radius:.4}; run longer")]
    NotAbsorbed {
        multiplier: f64,
        final_l2: f64,
        radius: f64,
    },
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

/// Verdicts whose fit residual is too large to trust are inconclusive.
pub const INCONCLUSIVE_RESIDUAL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl VerdictStatus {
    /// Pass/fail unless the supporting fit is too poor to decide.
    pub fn classify(pass: bool, relative_residual: f64) -> Self {
        if !(relative_residual <= INCONCLUSIVE_RESIDUAL) {
            VerdictStatus::Inconclusive
        } else if pass {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == VerdictStatus::Pass
    }
}

/// Largest fit residual relative to `max(max|y|, 1)`.
pub fn relative_residual(max_abs_residual: f64, y: &[f64]) -> f64 {
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    max_abs_residual / scale
}
