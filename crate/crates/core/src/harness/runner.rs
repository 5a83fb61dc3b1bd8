//! Execution of runs, sweeps, ball checks, and audits with file output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use super::presets::TrajectoryCheck;
use super::HarnessError;
use crate::diagnostics::{
    absorbing_ball_check, check_radius_lower_bound, convergence_study, energy_residual_check,
    estimate_gevrey_radius, grad_growth_check, linf_boundedness_check, write_csv, AbsorbingBallReport,
    ConvergenceReport, DiagnosticsRecord, EnergyCheck, GevreyEstimate, SweptParameter, VerdictStatus,
};
use crate::evolution::{EvolutionError, Simulation, SolverConfig};
use crate::laws::{audit_condition, AuditSettings, ConditionAuditReport, ConditionId, LawKind};
use crate::spectral::sobolev_norm;

/// Relative energy-residual tolerance for the `energy-residual` check.
pub const ENERGY_TOLERANCE: f64 = 1e-6;
const REALNESS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Write a checkpoint file every this many steps.
    pub checkpoint_every: Option<u64>,
    pub strict: bool,
    pub workers: Option<usize>,
}

/// Whether a verdict failed; errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub verdict_failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: VerdictStatus,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: SolverConfig,
    pub dt: f64,
    pub steps: u64,
    pub t_final: f64,
    /// Step the run was resumed from, if any.
    pub resumed_from: Option<u64>,
    /// `κ = ν = 0` MG runs have no long-time guarantee and are labeled exploratory.
    pub exploratory: bool,
    pub warnings: Vec<String>,
    pub final_record: DiagnosticsRecord,
    pub energy: EnergyCheck,
    pub checks: Vec<CheckResult>,
}

fn io_err(path: &Path, e: impl ToString) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_series(dir: &Path, records: &[DiagnosticsRecord], config: &SolverConfig) -> Result<(), HarnessError> {
    let path = dir.join("diagnostics.csv");
    let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    write_csv(records, &config.sobolev_s, file).map_err(|e| io_err(&path, e))
}

fn strict_check(strict: bool, warnings: &[String]) -> Result<(), HarnessError> {
    match warnings.first() {
        Some(w) if strict => Err(HarnessError::Strict(w.clone())),
        _ => Ok(()),
    }
}

fn checkpoint_of(sim: &Simulation) -> Checkpoint {
    let c = sim.config();
    Checkpoint {
        law: c.law,
        nu: c.nu,
        kappa: c.kappa,
        gamma: c.gamma,
        dt: sim.dt(),
        state: sim.state().clone(),
    }
}

/// Run a trajectory from the config's initial data.
pub fn execute_trajectory(
    config: &SolverConfig,
    checks: &[TrajectoryCheck],
    opts: &RunOptions,
) -> Result<(RunSummary, Outcome), HarnessError> {
    let sim = Simulation::new(config)?;
    strict_check(opts.strict, sim.warnings())?;
    drive(sim, checks, opts, None)
}

/// Continue a trajectory from a checkpoint file; the header must match `config`.
pub fn resume_trajectory(
    config: &SolverConfig,
    checkpoint: &Path,
    checks: &[TrajectoryCheck],
    opts: &RunOptions,
) -> Result<(RunSummary, Outcome), HarnessError> {
    config.validate()?;
    let ck = load_checkpoint(checkpoint)?;
    let grid = ck.state.theta.grid();
    if ck.law != config.law
        || ck.nu != config.nu
        || ck.kappa != config.kappa
        || ck.gamma != config.gamma
        || grid.dim() != config.d
        || grid.n() != config.n
    {
        return Err(HarnessError::Usage(format!(
            "checkpoint {} (law {}, nu {}, kappa {}, gamma {}, d {}, n {}) does not match the config",
            checkpoint.display(),
            ck.law,
            ck.nu,
            ck.kappa,
            ck.gamma,
            grid.dim(),
            grid.n()
        )));
    }
    let from = ck.state.step;
    let sim = Simulation::from_state(config, ck.state, ck.dt)?;
    strict_check(opts.strict, sim.warnings())?;
    drive(sim, checks, opts, Some(from))
}

fn drive(
    mut sim: Simulation,
    checks: &[TrajectoryCheck],
    opts: &RunOptions,
    resumed_from: Option<u64>,
) -> Result<(RunSummary, Outcome), HarnessError> {
    ensure_dir(&opts.out_dir)?;
    let config = sim.config().clone();
    let want_radius = checks.contains(&TrajectoryCheck::GevreyRadius);
    let radius_s = config.gevrey_s.unwrap_or(1.0);
    let theta0 = sim.state().theta.clone();
    let mut radius_series: Vec<(f64, GevreyEstimate)> = Vec::new();
    let mut radius_error = None;
    let mut observe_radius = |sim: &Simulation, series: &mut Vec<(f64, GevreyEstimate)>| {
        if want_radius && radius_error.is_none() {
            match estimate_gevrey_radius(&sim.state().theta, radius_s) {
                Ok(e) => series.push((sim.state().t, e)),
                Err(e) => radius_error = Some(e.to_string()),
            }
        }
    };

    let mut records = vec![sim.record()];
    observe_radius(&sim, &mut radius_series);
    let total = sim.total_steps();
    let every = config.checkpoint_every;
    while sim.state().step < total {
        let step = sim.state().step;
        let mut target = (step / every + 1) * every;
        if let Some(k) = opts.checkpoint_every {
            target = target.min((step / k + 1) * k);
        }
        let target = target.min(total);
        if let Err(e) = sim.advance_to(target, &mut records) {
            if let EvolutionError::BlowUp { records: partial, .. } = &e {
                write_series(&opts.out_dir, partial, &config)?;
            }
            return Err(e.into());
        }
        let step = sim.state().step;
        if step % every == 0 || step == total {
            observe_radius(&sim, &mut radius_series);
        }
        if let Some(k) = opts.checkpoint_every {
            if step % k == 0 {
                let path = opts.out_dir.join(format!("checkpoint_{step:08}.aslb"));
                save_checkpoint(&checkpoint_of(&sim), &path)?;
            }
        }
    }
    save_checkpoint(&checkpoint_of(&sim), &opts.out_dir.join("final.aslb"))?;
    write_series(&opts.out_dir, &records, &config)?;

    let energy = energy_residual_check(&records, ENERGY_TOLERANCE);
    let mut results = Vec::new();
    let max_imag = records.iter().map(|r| r.max_imag).fold(0.0, f64::max);
    results.push(CheckResult {
        name: "realness".into(),
        status: pass_fail(max_imag < REALNESS_TOLERANCE),
        detail: serde_json::json!({ "max_imag": max_imag, "tolerance": REALNESS_TOLERANCE }),
    });
    let forced = sobolev_norm(&sim.forcing(), 0.0) > 0.0;
    if !forced && config.kappa > 0.0 {
        let monotone = records.windows(2).all(|w| w[1].l2 <= w[0].l2);
        results.push(CheckResult {
            name: "l2-contraction".into(),
            status: pass_fail(monotone),
            detail: serde_json::json!({ "monotone": monotone }),
        });
    }
    for check in checks {
        let result = match check {
            TrajectoryCheck::EnergyResidual => CheckResult {
                name: "energy-residual".into(),
                status: pass_fail(energy.pass),
                detail: serde_json::to_value(&energy).expect("serializable"),
            },
            TrajectoryCheck::GevreyRadius => match &radius_error {
                Some(msg) => CheckResult {
                    name: "gevrey-radius".into(),
                    status: VerdictStatus::Inconclusive,
                    detail: serde_json::json!({ "error": msg }),
                },
                None => {
                    let v = check_radius_lower_bound(&radius_series, Some(&theta0), Some(&sim.forcing()), radius_s)?;
                    CheckResult {
                        name: "gevrey-radius".into(),
                        status: v.status,
                        detail: serde_json::to_value(&v).expect("serializable"),
                    }
                }
            },
            TrajectoryCheck::GradGrowth => {
                let v = grad_growth_check(&records, forced);
                CheckResult {
                    name: "grad-growth".into(),
                    status: v.status,
                    detail: serde_json::to_value(&v).expect("serializable"),
                }
            }
            TrajectoryCheck::LinfBoundedness => {
                let v = linf_boundedness_check(&records, config.d, config.gamma);
                CheckResult {
                    name: "linf-boundedness".into(),
                    status: v.status,
                    detail: serde_json::to_value(&v).expect("serializable"),
                }
            }
        };
        results.push(result);
    }

    let exploratory = config.law == LawKind::Mg && config.nu == 0.0 && config.kappa == 0.0;
    let mut warnings = sim.warnings().to_vec();
    if exploratory {
        warnings.push("MG with nu = 0 and kappa = 0: only short-time results are meaningful (exploratory)".into());
    }
    let verdict_failed = results.iter().any(|r| r.status == VerdictStatus::Fail);
    let summary = RunSummary {
        config,
        dt: sim.dt(),
        steps: sim.state().step,
        t_final: sim.state().t,
        resumed_from,
        exploratory,
        warnings,
        final_record: records.last().cloned().expect("at least one record"),
        energy,
        checks: results,
    };
    write_json(&opts.out_dir.join("summary.json"), &summary)?;
    Ok((summary, Outcome { verdict_failed }))
}

fn pass_fail(ok: bool) -> VerdictStatus {
    if ok {
        VerdictStatus::Pass
    } else {
        VerdictStatus::Fail
    }
}

/// Convergence study written to `convergence.json`.
pub fn execute_sweep(
    config: &SolverConfig,
    parameter: SweptParameter,
    values: &[f64],
    s_values: &[f64],
    eval_times: &[f64],
    opts: &RunOptions,
) -> Result<(ConvergenceReport, Outcome), HarnessError> {
    ensure_dir(&opts.out_dir)?;
    let report = convergence_study(config, parameter, values, s_values, eval_times, opts.workers)?;
    strict_check(opts.strict, &report.warnings)?;
    write_json(&opts.out_dir.join("convergence.json"), &report)?;
    let verdict_failed = report.status == VerdictStatus::Fail;
    Ok((report, Outcome { verdict_failed }))
}

/// Absorbing-ball check written to `absorbing_ball.json`.
pub fn execute_ball(
    config: &SolverConfig,
    multipliers: &[f64],
    deadline: f64,
    opts: &RunOptions,
) -> Result<(AbsorbingBallReport, Outcome), HarnessError> {
    ensure_dir(&opts.out_dir)?;
    let report = absorbing_ball_check(config, multipliers, deadline, opts.workers)?;
    write_json(&opts.out_dir.join("absorbing_ball.json"), &report)?;
    let verdict_failed = report.status != VerdictStatus::Pass;
    Ok((report, Outcome { verdict_failed }))
}

pub fn audit_file_name(law: LawKind, condition: ConditionId) -> String {
    format!("audit_{}_{}.json", law, condition.name().replace('*', "star"))
}

/// One report file per `(law, condition)`.
pub fn execute_audits(
    laws: &[LawKind],
    conditions: &[ConditionId],
    k_max: u32,
    nu_values: &[f64],
    opts: &RunOptions,
) -> Result<(Vec<ConditionAuditReport>, Outcome), HarnessError> {
    ensure_dir(&opts.out_dir)?;
    let settings = AuditSettings::default();
    let mut reports = Vec::new();
    for &law in laws {
        for &condition in conditions {
            let report = audit_condition(law, condition, k_max, nu_values, &settings)?;
            write_json(&opts.out_dir.join(audit_file_name(law, condition)), &report)?;
            reports.push(report);
        }
    }
    let verdict_failed = reports.iter().any(|r| !r.pass);
    Ok((reports, Outcome { verdict_failed }))
}
