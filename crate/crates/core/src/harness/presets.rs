//! Named experiments with pinned discretization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::diagnostics::SweptParameter;
use crate::evolution::{FieldSpec, ModeSpec, SolverConfig};
use crate::laws::{ConditionId, LawKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetId {
    MgDiffusiveNuSweep,
    MgInviscidGevrey,
    IpmbNuSweep,
    SqgCriticalKappaSweep,
    AbsorbingBall,
    SymbolAuditAll,
}

impl PresetId {
    pub const ALL: [PresetId; 6] = [
        PresetId::MgDiffusiveNuSweep,
        PresetId::MgInviscidGevrey,
        PresetId::IpmbNuSweep,
        PresetId::SqgCriticalKappaSweep,
        PresetId::AbsorbingBall,
        PresetId::SymbolAuditAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::MgDiffusiveNuSweep => "mg-diffusive-nu-sweep",
            PresetId::MgInviscidGevrey => "mg-inviscid-gevrey",
            PresetId::IpmbNuSweep => "ipmb-nu-sweep",
            PresetId::SqgCriticalKappaSweep => "sqg-critical-kappa-sweep",
            PresetId::AbsorbingBall => "absorbing-ball",
            PresetId::SymbolAuditAll => "symbol-audit-all",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::UnknownPreset(s.to_string()))
    }
}

/// What a preset asks the harness to do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PresetPlan {
    /// One trajectory with the listed checks.
    Trajectory { checks: Vec<TrajectoryCheck> },
    /// Convergence study in one parameter against the value 0.
    Sweep {
        parameter: SweptParameter,
        values: Vec<f64>,
        s_values: Vec<f64>,
        eval_times: Vec<f64>,
    },
    /// Trajectories from rescaled initial data against the absorbing ball.
    AbsorbingBall { multipliers: Vec<f64>, deadline: f64 },
    /// Symbol condition audits.
    Audit {
        laws: Vec<LawKind>,
        conditions: Vec<ConditionId>,
        #[serde(rename = "K")]
        k_max: u32,
        nu_values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryCheck {
    EnergyResidual,
    GevreyRadius,
    GradGrowth,
    LinfBoundedness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub id: PresetId,
    pub config: SolverConfig,
    pub plan: PresetPlan,
}

impl ExperimentPreset {
    pub fn kind_name(&self) -> &'static str {
        match self.plan {
            PresetPlan::Trajectory { .. } => "trajectory",
            PresetPlan::Sweep { .. } => "sweep",
            PresetPlan::AbsorbingBall { .. } => "absorbing-ball",
            PresetPlan::Audit { .. } => "audit",
        }
    }
}

fn analytic(tau: f64, l2: f64) -> FieldSpec {
    FieldSpec::Analytic {
        tau,
        s: 1.0,
        l2: Some(l2),
        seed: None,
    }
}

fn mode(k: Vec<i64>, re: f64) -> FieldSpec {
    FieldSpec::Modes {
        modes: vec![ModeSpec { k, re, im: 0.0 }],
    }
}

/// Expand a preset id into its configuration and plan.
pub fn preset(id: PresetId) -> ExperimentPreset {
    let (config, plan) = match id {
        PresetId::MgDiffusiveNuSweep => {
            let mut c = SolverConfig::new(LawKind::Mg, 0.0, 1.0, 2.0, 32, 2e-3, 2.0);
            c.initial_data = analytic(0.3, 1.0);
            c.forcing = mode(vec![1, 1, 1], 0.5);
            c.checkpoint_every = 25;
            (
                c,
                PresetPlan::Sweep {
                    parameter: SweptParameter::Nu,
                    values: vec![1.0, 0.1, 0.01, 0.0],
                    s_values: vec![1.0],
                    eval_times: vec![0.5, 1.0, 2.0],
                },
            )
        }
        PresetId::MgInviscidGevrey => {
            let mut c = SolverConfig::new(LawKind::Mg, 0.1, 0.0, 2.0, 32, 2e-3, 1.0);
            c.initial_data = analytic(0.7, 0.5);
            c.gevrey_s = Some(1.0);
            c.checkpoint_every = 25;
            (
                c,
                PresetPlan::Trajectory {
                    checks: vec![
                        TrajectoryCheck::EnergyResidual,
                        TrajectoryCheck::GevreyRadius,
                        TrajectoryCheck::GradGrowth,
                    ],
                },
            )
        }
        PresetId::IpmbNuSweep => {
            let mut c = SolverConfig::new(LawKind::Ipmb, 0.0, 0.0, 2.0, 128, 1e-3, 0.5);
            c.initial_data = analytic(1.5, 1.0);
            c.sobolev_s = vec![0.0, 1.0];
            c.checkpoint_every = 50;
            (
                c,
                PresetPlan::Sweep {
                    parameter: SweptParameter::Nu,
                    values: vec![0.1, 0.05, 0.025, 0.0125, 0.0],
                    s_values: vec![1.0],
                    eval_times: vec![0.5],
                },
            )
        }
        PresetId::SqgCriticalKappaSweep => {
            let mut c = SolverConfig::new(LawKind::Sqg, 0.1, 0.0, 1.0, 128, 1e-3, 0.5);
            c.initial_data = analytic(0.5, 1.0);
            c.checkpoint_every = 50;
            (
                c,
                PresetPlan::Sweep {
                    parameter: SweptParameter::Kappa,
                    values: vec![0.1, 0.05, 0.025, 0.0],
                    s_values: vec![1.0],
                    eval_times: vec![0.5],
                },
            )
        }
        PresetId::AbsorbingBall => {
            let mut c = SolverConfig::new(LawKind::Mg, 0.1, 1.0, 2.0, 32, 1e-2, 40.0);
            c.forcing = mode(vec![1, 1, 1], 0.5);
            c.checkpoint_every = 50;
            (
                c,
                PresetPlan::AbsorbingBall {
                    multipliers: vec![1.0, 5.0, 10.0],
                    deadline: 20.0,
                },
            )
        }
        PresetId::SymbolAuditAll => (
            SolverConfig::new(LawKind::Mg, 0.0, 1.0, 2.0, 16, 1e-3, 1.0),
            PresetPlan::Audit {
                laws: LawKind::ALL.to_vec(),
                conditions: ConditionId::ALL.to_vec(),
                k_max: 32,
                nu_values: vec![0.0, 1e-3, 0.1, 1.0],
            },
        ),
    };
    ExperimentPreset { id, config, plan }
}
