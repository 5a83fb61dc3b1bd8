use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{parse_config, ParsedConfig};
use super::presets::{preset, ExperimentPreset, PresetId, PresetPlan, TrajectoryCheck};
use super::report::render_report;
use super::runner::{
    execute_audits, execute_ball, execute_sweep, execute_trajectory, resume_trajectory, Outcome, RunOptions,
};
use super::{HarnessError, EXIT_OK, EXIT_USAGE, EXIT_VERDICT};
use crate::diagnostics::SweptParameter;
use crate::evolution::SolverConfig;
use crate::laws::{ConditionId, LawKind};

const DEFAULT_OUT: &str = "asl-out";

#[derive(Debug, Parser)]
#[command(name = "asl", version, about = "Pseudo-spectral active scalar solver and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (falls back to $ASL_OUT_DIR, then ./asl-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write a checkpoint file every N steps.
    #[arg(long = "checkpoint-every", global = true)]
    checkpoint_every: Option<u64>,
    /// Treat warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory (or the absorbing-ball preset).
    Run(Target),
    /// Convergence study in nu or kappa.
    Sweep(SweepArgs),
    /// Audit symbol conditions on integer shells.
    Audit(AuditArgs),
    /// Summarize outputs in a directory.
    Report {
        /// Directory to read (default: the output directory).
        dir: Option<PathBuf>,
    },
    /// Continue a trajectory from a checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        target: Target,
    },
}

#[derive(Debug, Args)]
struct Target {
    /// `preset:<id>` or a config path.
    target: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    target: Target,
    /// Swept parameter when sweeping a plain config.
    #[arg(long)]
    param: Option<String>,
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Sobolev indices of the difference norms.
    #[arg(long = "s", value_delimiter = ',')]
    s_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// mg, ipmb, sqg, or all.
    #[arg(long)]
    law: Option<String>,
    #[arg(long = "K")]
    k_max: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    /// A1, A2, A2*, A3, A5 (comma separated) or all; default A1.
    #[arg(long, value_delimiter = ',')]
    condition: Option<Vec<String>>,
    #[arg(long)]
    preset: Option<String>,
}

impl Target {
    fn resolve(&self) -> Result<ParsedConfig, HarnessError> {
        let mut sources = Vec::new();
        if let Some(t) = &self.target {
            sources.push(match t.strip_prefix("preset:") {
                Some(id) => Source::Preset(id.to_string()),
                None => Source::Path(PathBuf::from(t)),
            });
        }
        if let Some(p) = &self.config {
            sources.push(Source::Path(p.clone()));
        }
        if let Some(id) = &self.preset {
            sources.push(Source::Preset(id.clone()));
        }
        match sources.len() {
            0 => Err(HarnessError::Usage("need a config path, --config, or --preset".into())),
            1 => match sources.pop().unwrap() {
                Source::Preset(id) => Ok(ParsedConfig::Preset(preset(id.parse::<PresetId>()?))),
                Source::Path(p) => parse_config(&p),
            },
            _ => Err(HarnessError::Usage("give exactly one of a target, --config, --preset".into())),
        }
    }
}

enum Source {
    Preset(String),
    Path(PathBuf),
}

fn apply_seed(config: &mut SolverConfig, seed: Option<u64>) {
    if let Some(seed) = seed {
        config.seed = seed;
    }
}

fn wrong_kind(p: &ExperimentPreset, command: &str) -> HarnessError {
    let hint = match p.plan {
        PresetPlan::Trajectory { .. } | PresetPlan::AbsorbingBall { .. } => "run",
        PresetPlan::Sweep { .. } => "sweep",
        PresetPlan::Audit { .. } => "audit",
    };
    HarnessError::Usage(format!(
        "preset {} is a {} experiment; use `asl {hint}` instead of `asl {command}`",
        p.id,
        p.kind_name()
    ))
}

fn parse_laws(s: &str) -> Result<Vec<LawKind>, HarnessError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(LawKind::ALL.to_vec());
    }
    s.split(',')
        .map(|l| LawKind::parse(l.trim()).ok_or_else(|| HarnessError::Usage(format!("unknown law {l:?}"))))
        .collect()
}

fn parse_conditions(list: &[String]) -> Result<Vec<ConditionId>, HarnessError> {
    if list.iter().any(|c| c.eq_ignore_ascii_case("all")) {
        return Ok(ConditionId::ALL.to_vec());
    }
    list.iter()
        .map(|c| ConditionId::parse(c.trim()).ok_or_else(|| HarnessError::Usage(format!("unknown condition {c:?}"))))
        .collect()
}

fn execute(cli: Cli) -> Result<Outcome, HarnessError> {
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("ASL_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let opts = RunOptions {
        out_dir: out_dir.clone(),
        checkpoint_every: cli.checkpoint_every,
        strict: cli.strict,
        workers: cli.workers,
    };
    if cli.checkpoint_every == Some(0) {
        return Err(HarnessError::Usage("--checkpoint-every must be at least 1".into()));
    }
    if cli.workers == Some(0) {
        return Err(HarnessError::Usage("--workers must be at least 1".into()));
    }
    match cli.command {
        Command::Run(target) => match target.resolve()? {
            ParsedConfig::Solver(mut c) => {
                apply_seed(&mut c, cli.seed);
                let checks: Vec<TrajectoryCheck> = c.gevrey_s.map(|_| TrajectoryCheck::GevreyRadius).into_iter().collect();
                let (summary, outcome) = execute_trajectory(&c, &checks, &opts)?;
                println!("{} steps to t = {}; outputs in {}", summary.steps, summary.t_final, out_dir.display());
                Ok(outcome)
            }
            ParsedConfig::Preset(mut p) => {
                apply_seed(&mut p.config, cli.seed);
                match &p.plan {
                    PresetPlan::Trajectory { checks } => {
                        let (summary, outcome) = execute_trajectory(&p.config, checks, &opts)?;
                        println!("{}: {} steps; outputs in {}", p.id, summary.steps, out_dir.display());
                        Ok(outcome)
                    }
                    PresetPlan::AbsorbingBall { multipliers, deadline } => {
                        let (report, outcome) = execute_ball(&p.config, multipliers, *deadline, &opts)?;
                        println!("{}: radius {:.4e}, status {:?}", p.id, report.radius, report.status);
                        Ok(outcome)
                    }
                    _ => Err(wrong_kind(&p, "run")),
                }
            }
        },
        Command::Sweep(args) => {
            let (config, parameter, values, s_values, times) = match args.target.resolve()? {
                ParsedConfig::Preset(p) => match p.plan {
                    PresetPlan::Sweep {
                        parameter,
                        values,
                        s_values,
                        eval_times,
                    } => (
                        p.config,
                        parameter,
                        args.values.unwrap_or(values),
                        args.s_values.unwrap_or(s_values),
                        args.times.unwrap_or(eval_times),
                    ),
                    _ => return Err(wrong_kind(&p, "sweep")),
                },
                ParsedConfig::Solver(c) => {
                    let parameter = match args.param.as_deref() {
                        Some("nu") => SweptParameter::Nu,
                        Some("kappa") => SweptParameter::Kappa,
                        Some(other) => return Err(HarnessError::Usage(format!("cannot sweep {other:?}"))),
                        None => return Err(HarnessError::Usage("sweeping a config needs --param nu|kappa".into())),
                    };
                    let values = args
                        .values
                        .ok_or_else(|| HarnessError::Usage("sweeping a config needs --values".into()))?;
                    let times = args.times.unwrap_or_else(|| vec![c.t_end]);
                    let s_values = args.s_values.unwrap_or_else(|| c.sobolev_s.clone());
                    (c, parameter, values, s_values, times)
                }
            };
            let mut config = config;
            apply_seed(&mut config, cli.seed);
            let (report, outcome) = execute_sweep(&config, parameter, &values, &s_values, &times, &opts)?;
            println!(
                "sweep over {}: monotone {}, status {:?}; outputs in {}",
                report.parameter,
                report.monotone,
                report.status,
                out_dir.display()
            );
            Ok(outcome)
        }
        Command::Audit(args) => {
            let (mut laws, mut conditions, mut k_max, mut nus) =
                (LawKind::ALL.to_vec(), vec![ConditionId::A1], 32, vec![0.0, 1e-3, 0.1, 1.0]);
            if let Some(id) = &args.preset {
                let p = preset(id.parse::<PresetId>()?);
                match p.plan {
                    PresetPlan::Audit {
                        laws: l,
                        conditions: c,
                        k_max: k,
                        nu_values,
                    } => {
                        laws = l;
                        conditions = c;
                        k_max = k;
                        nus = nu_values;
                    }
                    _ => return Err(wrong_kind(&p, "audit")),
                }
            }
            if let Some(l) = &args.law {
                laws = parse_laws(l)?;
            }
            if let Some(c) = &args.condition {
                conditions = parse_conditions(c)?;
            }
            if let Some(k) = args.k_max {
                k_max = k;
            }
            if let Some(n) = args.nu {
                nus = n;
            }
            let (reports, outcome) = execute_audits(&laws, &conditions, k_max, &nus, &opts)?;
            for r in &reports {
                println!(
                    "{} {}: measured {:.6e} -> {}",
                    r.law,
                    r.condition.name(),
                    r.measured_sup,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(outcome)
        }
        Command::Report { dir } => {
            let dir = dir.unwrap_or(out_dir);
            let text = render_report(&dir)?;
            print!("{text}");
            let path = dir.join("report.txt");
            std::fs::write(&path, &text).map_err(|e| HarnessError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            Ok(Outcome { verdict_failed: false })
        }
        Command::Resume { checkpoint, target } => {
            let (mut config, checks) = match target.resolve()? {
                ParsedConfig::Solver(c) => {
                    let checks = c.gevrey_s.map(|_| TrajectoryCheck::GevreyRadius).into_iter().collect();
                    (c, checks)
                }
                ParsedConfig::Preset(p) => match p.plan {
                    PresetPlan::Trajectory { checks } => (p.config, checks),
                    _ => return Err(wrong_kind(&p, "resume")),
                },
            };
            apply_seed(&mut config, cli.seed);
            let (summary, outcome) = resume_trajectory(&config, &checkpoint, &checks, &opts)?;
            println!(
                "resumed at step {} and ran to step {}; outputs in {}",
                summary.resumed_from.unwrap_or(0),
                summary.steps,
                out_dir.display()
            );
            Ok(outcome)
        }
    }
}

/// Parse `args` (program name first) and execute; returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Outcome { verdict_failed: false }) => EXIT_OK,
        Ok(Outcome { verdict_failed: true }) => EXIT_VERDICT,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
