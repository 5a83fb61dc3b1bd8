//! Plain-text tables from the JSON outputs in a directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::runner::RunSummary;
use super::HarnessError;
use crate::diagnostics::{AbsorbingBallReport, ConvergenceReport};
use crate::laws::ConditionAuditReport;

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, HarnessError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map(Some).map_err(|e| HarnessError::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"))
}

/// Summarize every recognized output file in `dir`.
pub fn render_report(dir: &Path) -> Result<String, HarnessError> {
    if !dir.is_dir() {
        return Err(HarnessError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut out = String::new();
    let mut found = false;

    if let Some(s) = read::<RunSummary>(&dir.join("summary.json"))? {
        found = true;
        let c = &s.config;
        let r = &s.final_record;
        writeln!(out, "run: law {} nu {} kappa {} gamma {} d {} n {}", c.law, c.nu, c.kappa, c.gamma, c.d, c.n).unwrap();
        writeln!(out, "  steps {} dt {} t_final {}", s.steps, s.dt, s.t_final).unwrap();
        writeln!(
            out,
            "  final  l2 {:.6e}  linf {:.6e}  grad_ld {:.6e}  gevrey_tau {}",
            r.l2,
            r.linf,
            r.grad_ld,
            fmt_opt(r.gevrey_tau)
        )
        .unwrap();
        writeln!(out, "  energy residual (relative) {:.3e}", s.energy.relative).unwrap();
        writeln!(out, "  {:<20} {}", "check", "status").unwrap();
        for check in &s.checks {
            writeln!(out, "  {:<20} {:?}", check.name, check.status).unwrap();
        }
        if s.exploratory {
            writeln!(out, "  (exploratory regime)").unwrap();
        }
        for w in &s.warnings {
            writeln!(out, "  warning: {w}").unwrap();
        }
    }

    if let Some(c) = read::<ConvergenceReport>(&dir.join("convergence.json"))? {
        found = true;
        writeln!(out, "sweep over {} (reference {}), status {:?}", c.parameter, c.reference, c.status).unwrap();
        for fit in &c.fits {
            writeln!(out, "  t = {}  s = {}", fit.t, fit.s).unwrap();
            writeln!(out, "  {:>12} {:>14}", c.parameter.to_string(), "difference").unwrap();
            for (v, d) in c.values.iter().zip(c.column(fit.t, fit.s)) {
                writeln!(out, "  {v:>12} {d:>14.6e}").unwrap();
            }
            writeln!(
                out,
                "  rate {}  monotone {}  ratios {:?}",
                fmt_opt(fit.rate),
                fit.monotone,
                fit.ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>()
            )
            .unwrap();
        }
    }

    if let Some(b) = read::<AbsorbingBallReport>(&dir.join("absorbing_ball.json"))? {
        found = true;
        writeln!(out, "absorbing ball: R = {:.6e}, deadline {}, status {:?}", b.radius, b.deadline, b.status).unwrap();
        writeln!(out, "  {:>10} {:>14} {:>10} {:>14}", "multiple", "initial l2", "entry t", "final l2").unwrap();
        for t in &b.trajectories {
            writeln!(
                out,
                "  {:>10} {:>14.6e} {:>10} {:>14.6e}",
                t.multiplier, t.initial_l2, t.entry_time, t.final_l2
            )
            .unwrap();
        }
    }

    let mut audits: Vec<_> = fs::read_dir(dir)
        .map_err(|e| HarnessError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("audit_") && n.ends_with(".json"))
        })
        .collect();
    audits.sort();
    if !audits.is_empty() {
        found = true;
        writeln!(out, "symbol audits").unwrap();
        writeln!(out, "  {:<6} {:<5} {:>5} {:>14} {:>6}", "law", "cond", "K", "measured", "pass").unwrap();
        for path in audits {
            if let Some(a) = read::<ConditionAuditReport>(&path)? {
                writeln!(
                    out,
                    "  {:<6} {:<5} {:>5} {:>14.6e} {:>6}",
                    a.law.name(),
                    a.condition.name(),
                    a.k_max,
                    a.measured_sup,
                    a.pass
                )
                .unwrap();
            }
        }
    }

    if !found {
        return Err(HarnessError::Usage(format!("no outputs found in {}", dir.display())));
    }
    Ok(out)
}
