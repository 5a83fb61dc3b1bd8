use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{relative_residual, DiagnosticsError, VerdictStatus};
use crate::evolution::{Simulation, SolverConfig};
use crate::fit::linear_fit;
use crate::spectral::{sobolev_norm, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweptParameter {
    Nu,
    Kappa,
}

impl fmt::Display for SweptParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweptParameter::Nu => "nu",
            SweptParameter::Kappa => "kappa",
        })
    }
}

impl SweptParameter {
    pub fn apply(self, config: &mut SolverConfig, value: f64) {
        match self {
            SweptParameter::Nu => config.nu = value,
            SweptParameter::Kappa => config.kappa = value,
        }
    }
}

/// `‖θ^{value}(t) − θ^{ref}(t)‖_{H^s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCell {
    pub value: f64,
    pub t: f64,
    pub s: f64,
    pub diff: f64,
}

/// Power-law fit of the difference norm in the swept parameter at one `(t, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub t: f64,
    pub s: f64,
    /// Slope of `log diff` against `log value`; `None` with fewer than two positive points.
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub relative_residual: Option<f64>,
    /// Strict decrease as the parameter decreases toward the reference.
    pub monotone: bool,
    /// `diff(v_i) / diff(v_{i+1})` along decreasing values.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub parameter: SweptParameter,
    /// Swept values other than the reference, in decreasing order.
    pub values: Vec<f64>,
    pub reference: f64,
    pub eval_times: Vec<f64>,
    pub s_values: Vec<f64>,
    pub dt: f64,
    pub table: Vec<ConvergenceCell>,
    pub fits: Vec<RateFit>,
    pub monotone: bool,
    pub min_ratio: Option<f64>,
    pub status: VerdictStatus,
    pub base: SolverConfig,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn diff(&self, value: f64, t: f64, s: f64) -> Option<f64> {
        self.table
            .iter()
            .find(|c| c.value == value && c.t == t && c.s == s)
            .map(|c| c.diff)
    }

    /// Differences at `(t, s)` in the order of [`values`](Self::values).
    pub fn column(&self, t: f64, s: f64) -> Vec<f64> {
        self.values.iter().filter_map(|&v| self.diff(v, t, s)).collect()
    }
}

struct MemberOutput {
    snapshots: Vec<SpectralField>,
    warnings: Vec<String>,
}

fn run_member(
    base: &SolverConfig,
    parameter: SweptParameter,
    value: f64,
    eval_steps: &[u64],
) -> Result<MemberOutput, DiagnosticsError> {
    let mut config = base.clone();
    parameter.apply(&mut config, value);
    config.auto_halve_dt = false;
    let fail = |source| DiagnosticsError::MemberFailed {
        parameter: parameter.to_string(),
        value,
        source,
    };
    let mut sim = Simulation::new(&config).map_err(fail)?;
    let mut scratch = Vec::new();
    let mut snapshots = Vec::with_capacity(eval_steps.len());
    for &step in eval_steps {
        sim.advance_to(step, &mut scratch).map_err(fail)?;
        scratch.clear();
        snapshots.push(sim.state().theta.clone());
    }
    Ok(MemberOutput {
        snapshots,
        warnings: sim.warnings().iter().map(|w| format!("{parameter} = {value}: {w}")).collect(),
    })
}

/// Run every swept value with identical discretization and compare against
/// the reference value `0`.
///
/// `workers` sizes the thread pool; `None` uses the available parallelism.
pub fn convergence_study(
    base: &SolverConfig,
    parameter: SweptParameter,
    values: &[f64],
    s_values: &[f64],
    eval_times: &[f64],
    workers: Option<usize>,
) -> Result<ConvergenceReport, DiagnosticsError> {
    const REFERENCE: f64 = 0.0;
    if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(DiagnosticsError::InvalidInput("swept values must be finite and >= 0".into()));
    }
    if !values.contains(&REFERENCE) {
        return Err(DiagnosticsError::InvalidInput("swept values must include the reference 0".into()));
    }
    if eval_times.is_empty() || s_values.is_empty() {
        return Err(DiagnosticsError::InvalidInput("need at least one eval time and one s".into()));
    }
    let dt = base.dt;
    let mut eval_steps = Vec::with_capacity(eval_times.len());
    for &t in eval_times {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(DiagnosticsError::InvalidInput(format!("eval time {t} must be >= 0")));
        }
        eval_steps.push((t / dt).round() as u64);
    }
    let mut base = base.clone();
    let t_max = eval_times.iter().cloned().fold(0.0, f64::max);
    if base.t_end < t_max {
        base.t_end = t_max;
    }

    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| DiagnosticsError::InvalidInput(format!("worker pool: {e}")))?;
    let outputs: Vec<Result<MemberOutput, DiagnosticsError>> = pool.install(|| {
        distinct
            .par_iter()
            .map(|&v| run_member(&base, parameter, v, &eval_steps))
            .collect()
    });
    let mut members = Vec::with_capacity(outputs.len());
    for out in outputs {
        members.push(out?);
    }
    let ref_pos = distinct.iter().position(|&v| v == REFERENCE).expect("reference present");

    let swept: Vec<f64> = distinct.iter().cloned().filter(|&v| v != REFERENCE).collect();
    let mut table = Vec::new();
    let mut fits = Vec::new();
    for (ti, &t) in eval_times.iter().enumerate() {
        let reference = &members[ref_pos].snapshots[ti];
        for &s in s_values {
            let mut column = Vec::new();
            for (pos, &v) in distinct.iter().enumerate() {
                let diff = sobolev_norm(&members[pos].snapshots[ti].sub(reference), s);
                table.push(ConvergenceCell { value: v, t, s, diff });
                if v != REFERENCE {
                    column.push((v, diff));
                }
            }
            fits.push(rate_fit(t, s, &column));
        }
    }
    let monotone = fits.iter().all(|f| f.monotone);
    let min_ratio = fits
        .iter()
        .flat_map(|f| f.ratios.iter().cloned())
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
    let worst_residual = fits
        .iter()
        .filter_map(|f| f.relative_residual)
        .fold(0.0f64, f64::max);
    let status = if swept.is_empty() {
        VerdictStatus::Pass
    } else {
        VerdictStatus::classify(monotone, worst_residual)
    };
    Ok(ConvergenceReport {
        parameter,
        values: swept,
        reference: REFERENCE,
        eval_times: eval_times.to_vec(),
        s_values: s_values.to_vec(),
        dt,
        table,
        fits,
        monotone,
        min_ratio,
        status,
        base,
        warnings: members.into_iter().flat_map(|m| m.warnings).collect(),
    })
}

/// `column` is ordered by decreasing value.
fn rate_fit(t: f64, s: f64, column: &[(f64, f64)]) -> RateFit {
    let monotone = column.windows(2).all(|w| w[1].1 < w[0].1);
    let ratios = column.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = column
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|(v, d)| (v.ln(), d.ln()))
        .unzip();
    let fit = linear_fit(&x, &y);
    RateFit {
        t,
        s,
        rate: fit.map(|f| f.slope),
        r_squared: fit.map(|f| f.r_squared),
        relative_residual: fit.map(|f| relative_residual(f.max_abs_residual, &y)),
        monotone,
        ratios,
    }
}
