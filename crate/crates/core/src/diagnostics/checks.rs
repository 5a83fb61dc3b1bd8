use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{relative_residual, DiagnosticsError, DiagnosticsRecord, VerdictStatus};
use crate::evolution::{build_field, Simulation, SolverConfig};
use crate::fit::{linear_fit, poly_eval, poly_fit};
use crate::spectral::{make_grid, sobolev_norm, sobolev_norm_sq, SpectralField};

/// `(Σ |k|^{-2} |Ŝ(k)|²)^{1/2}`.
pub fn h_minus_one_norm(f: &SpectralField) -> f64 {
    sobolev_norm_sq(f, -1.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub max_abs_residual: f64,
    pub max_energy: f64,
    /// `max |residual| / max ½‖θ‖²`.
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Energy-budget residual across a series, relative to the largest energy.
pub fn energy_residual_check(records: &[DiagnosticsRecord], tolerance: f64) -> EnergyCheck {
    let max_abs_residual = records.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max);
    let max_energy = records.iter().map(|r| 0.5 * r.l2 * r.l2).fold(0.0, f64::max);
    let relative = if max_energy > 0.0 {
        max_abs_residual / max_energy
    } else {
        max_abs_residual
    };
    EnergyCheck {
        max_abs_residual,
        max_energy,
        relative,
        tolerance,
        pass: relative <= tolerance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallTrajectory {
    pub multiplier: f64,
    pub initial_l2: f64,
    /// Earliest checkpoint after which `‖θ‖ ≤ R` holds for the rest of the run.
    pub entry_time: f64,
    pub inside_by_deadline: bool,
    pub final_l2: f64,
    /// Largest `‖θ‖` seen after the deadline.
    pub max_l2_after_deadline: f64,
    /// Nonincreasing `‖θ‖` (only judged when `S = 0`).
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingBallReport {
    pub kappa: f64,
    pub forcing_h_minus_one: f64,
    /// `1.1 κ^{-1} ‖S‖_{H^{-1}}`; zero when `S = 0`.
    pub radius: f64,
    pub deadline: f64,
    pub t_end: f64,
    pub trajectories: Vec<BallTrajectory>,
    pub status: VerdictStatus,
}

/// Start from the configured initial datum rescaled to `multiplier · R` and
/// check that every trajectory enters the ball `‖θ‖ ≤ R` by `deadline` and
/// stays there until `t_end`.
pub fn absorbing_ball_check(
    base: &SolverConfig,
    multipliers: &[f64],
    deadline: f64,
    workers: Option<usize>,
) -> Result<AbsorbingBallReport, DiagnosticsError> {
    base.validate()?;
    if !(base.kappa > 0.0) {
        return Err(DiagnosticsError::InvalidInput("absorbing ball needs kappa > 0".into()));
    }
    let grid = make_grid(base.d, base.n).map_err(crate::evolution::EvolutionError::from)?;
    let forcing = build_field(&base.forcing, &grid, base.seed.wrapping_add(1))?;
    let shape = build_field(&base.initial_data, &grid, base.seed)?;
    let forcing_h_minus_one = h_minus_one_norm(&forcing);
    let radius = 1.1 * forcing_h_minus_one / base.kappa;
    let unforced = forcing_h_minus_one == 0.0;
    let shape_norm = sobolev_norm(&shape, 0.0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| DiagnosticsError::InvalidInput(format!("worker pool: {e}")))?;
    let runs: Vec<Result<(f64, Vec<DiagnosticsRecord>), DiagnosticsError>> = pool.install(|| {
        multipliers
            .par_iter()
            .map(|&m| {
                let mut theta0 = shape.clone();
                if shape_norm > 0.0 {
                    // with S = 0 the multiplier scales the datum itself
                    let target = if unforced { m * shape_norm } else { m * radius };
                    theta0.scale(target / shape_norm);
                }
                let mut sim = Simulation::with_initial(base, theta0).map_err(|source| {
                    DiagnosticsError::MemberFailed {
                        parameter: "multiplier".into(),
                        value: m,
                        source,
                    }
                })?;
                let records = sim.run_to_end().map_err(|source| DiagnosticsError::MemberFailed {
                    parameter: "multiplier".into(),
                    value: m,
                    source,
                })?;
                Ok((m, records))
            })
            .collect()
    });

    let mut trajectories = Vec::new();
    for run in runs {
        let (multiplier, records) = run?;
        let final_l2 = records.last().map_or(0.0, |r| r.l2);
        let monotone = records.windows(2).all(|w| w[1].l2 <= w[0].l2);
        let entry_time = if unforced {
            0.0
        } else {
            let first_outside_after = records.iter().rposition(|r| r.l2 > radius);
            match first_outside_after {
                None => 0.0,
                Some(i) if i + 1 < records.len() => records[i + 1].t,
                Some(_) => {
                    return Err(DiagnosticsError::NotAbsorbed {
                        multiplier,
                        final_l2,
                        radius,
                    })
                }
            }
        };
        let max_l2_after_deadline = records
            .iter()
            .filter(|r| r.t >= deadline)
            .map(|r| r.l2)
            .fold(0.0, f64::max);
        trajectories.push(BallTrajectory {
            multiplier,
            initial_l2: records.first().map_or(0.0, |r| r.l2),
            entry_time,
            inside_by_deadline: entry_time <= deadline,
            final_l2,
            max_l2_after_deadline,
            monotone,
        });
    }
    let pass = if unforced {
        trajectories.iter().all(|t| t.monotone)
    } else {
        trajectories.iter().all(|t| t.inside_by_deadline)
    };
    Ok(AbsorbingBallReport {
        kappa: base.kappa,
        forcing_h_minus_one,
        radius,
        deadline,
        t_end: base.t_end,
        trajectories,
        status: if pass { VerdictStatus::Pass } else { VerdictStatus::Fail },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinfReport {
    /// Mean of `‖θ‖_∞` over the last quarter of the series.
    pub plateau: f64,
    pub sup_after_one: f64,
    /// `p` in `‖θ‖_∞ − plateau ~ t^{-p}` over the first half of the run.
    pub fitted_exponent: Option<f64>,
    /// `(d + 1 − γ) / (2γ)`.
    pub reference_exponent: f64,
    pub relative_residual: Option<f64>,
    pub status: VerdictStatus,
}

/// Shape of `‖θ(t)‖_∞`: finite, settling to a plateau, with a decaying early envelope.
pub fn linf_boundedness_check(records: &[DiagnosticsRecord], d: usize, gamma: f64) -> LinfReport {
    let reference_exponent = (d as f64 + 1.0 - gamma) / (2.0 * gamma);
    let n = records.len();
    let tail = (n / 4).max(1).min(n);
    let plateau = if n == 0 {
        f64::NAN
    } else {
        records[n - tail..].iter().map(|r| r.linf).sum::<f64>() / tail as f64
    };
    let sup_after_one = records
        .iter()
        .filter(|r| r.t >= 1.0)
        .map(|r| r.linf)
        .fold(0.0, f64::max);
    let peak = records.iter().map(|r| r.linf).fold(0.0, f64::max);
    let floor = 1e-12 * peak.max(f64::MIN_POSITIVE);
    let t_mid = records.last().map_or(0.0, |r| 0.5 * r.t);
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.t > 0.0 && r.t <= t_mid)
        .map(|r| (r.t.ln(), (r.linf - plateau).max(floor).ln()))
        .unzip();
    let fit = linear_fit(&x, &y);
    let fitted_exponent = fit.map(|f| -f.slope);
    let rel = fit.map(|f| relative_residual(f.max_abs_residual, &y));
    let finite = sup_after_one.is_finite() && plateau.is_finite();
    let status = match (fitted_exponent, rel) {
        (Some(p), Some(r)) => VerdictStatus::classify(finite && p > 0.0, r),
        _ => VerdictStatus::Inconclusive,
    };
    LinfReport {
        plateau,
        sup_after_one,
        fitted_exponent,
        reference_exponent,
        relative_residual: rel,
        status,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauScaling {
    /// `κ · plateau` per run; constant under `plateau ~ 1/κ`.
    pub products: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub pass: bool,
}

/// `plateau ~ 1/κ` within a factor 2 across runs.
pub fn linf_plateau_scaling(plateaus: &[(f64, f64)]) -> PlateauScaling {
    let products: Vec<(f64, f64)> = plateaus.iter().map(|&(k, p)| (k, k * p)).collect();
    let hi = products.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = products.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_ratio = hi / lo;
    PlateauScaling {
        products,
        max_ratio,
        pass: lo > 0.0 && max_ratio <= 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradGrowthReport {
    /// Coefficients of the fitted polynomial in `t`, constant term first.
    pub coefficients: Vec<f64>,
    /// `max (log ‖∇θ‖_{L^d} − fit)`.
    pub max_excess: f64,
    pub relative_residual: f64,
    pub status: VerdictStatus,
}

/// Allowed excess of `log ‖∇θ‖_{L^d}` over its fitted envelope.
pub const GRAD_EXCESS_TOLERANCE: f64 = 0.1;

/// Fit `log ‖∇θ‖_{L^d}` by a line (`forced = false`) or a quadratic in `t`.
pub fn grad_growth_check(records: &[DiagnosticsRecord], forced: bool) -> GradGrowthReport {
    let degree = if forced { 2 } else { 1 };
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let y: Vec<f64> = records.iter().map(|r| r.grad_ld.ln()).collect();
    match poly_fit(&t, &y, degree) {
        Some(c) => {
            let residuals: Vec<f64> = t.iter().zip(&y).map(|(&t, &y)| y - poly_eval(&c, t)).collect();
            let max_excess = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let max_abs = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let rel = relative_residual(max_abs, &y);
            GradGrowthReport {
                coefficients: c,
                max_excess,
                relative_residual: rel,
                status: VerdictStatus::classify(max_excess <= GRAD_EXCESS_TOLERANCE, rel),
            }
        }
        None => GradGrowthReport {
            coefficients: Vec::new(),
            max_excess: f64::NAN,
            relative_residual: f64::NAN,
            status: VerdictStatus::Inconclusive,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundReport {
    pub window: [f64; 2],
    pub s: f64,
    /// `(ν, sup_{t ∈ window} ‖θ^ν‖_{H^s})`.
    pub per_nu: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Spread of `sup_{t ∈ window} ‖θ^ν‖_{H^s}` across `ν`; passes below a factor 3.
pub fn uniform_nu_witness(runs: &[(f64, Vec<DiagnosticsRecord>)], window: [f64; 2], s: f64) -> UniformBoundReport {
    let per_nu: Vec<(f64, f64)> = runs
        .iter()
        .map(|(nu, records)| {
            let sup = records
                .iter()
                .filter(|r| r.t >= window[0] - 1e-12 && r.t <= window[1] + 1e-12)
                .filter_map(|r| r.sobolev(s))
                .fold(f64::NAN, f64::max);
            (*nu, sup)
        })
        .collect();
    let hi = per_nu.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = per_nu.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_ratio = hi / lo;
    UniformBoundReport {
        window,
        s,
        per_nu,
        max_ratio,
        pass: lo > 0.0 && max_ratio < 3.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::estimate_gevrey_radius;
    use crate::evolution::{run, FieldSpec, ModeSpec};
    use crate::laws::LawKind;
    use num_complex::Complex64;

    fn mode(k: Vec<i64>, re: f64) -> FieldSpec {
        FieldSpec::Modes {
            modes: vec![ModeSpec { k, re, im: 0.0 }],
        }
    }

    #[test]
    fn h_minus_one_of_single_mode() {
        let g = make_grid(2, 16).unwrap();
        let mut s = SpectralField::zeros(&g);
        s.set_mode(&[3, 4], Complex64::new(1.0, 0.0)).unwrap();
        // two modes of modulus 1 at |k| = 5
        assert!((h_minus_one_norm(&s) - (2.0f64).sqrt() / 5.0).abs() < 1e-15);
    }

    #[test]
    fn zero_datum_starts_inside() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.1, 1.0, 2.0, 16, 0.05, 2.0);
        c.forcing = mode(vec![1, 0], 0.5);
        let r = absorbing_ball_check(&c, &[0.0, 3.0], 1.5, Some(1)).unwrap();
        assert_eq!(r.trajectories[0].entry_time, 0.0);
        assert_eq!(r.trajectories[0].initial_l2, 0.0);
        assert!(r.trajectories[1].entry_time > 0.0);
        assert_eq!(r.status, VerdictStatus::Pass);
    }

    #[test]
    fn short_run_is_not_absorbed() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.1, 1.0, 2.0, 16, 0.05, 0.2);
        c.forcing = mode(vec![1, 0], 0.5);
        assert!(matches!(
            absorbing_ball_check(&c, &[10.0], 0.1, Some(1)),
            Err(DiagnosticsError::NotAbsorbed { .. })
        ));
    }

    #[test]
    fn unforced_ball_decays_monotonically() {
        let c = SolverConfig::new(LawKind::Sqg, 0.0, 1.0, 2.0, 16, 0.05, 2.0);
        let r = absorbing_ball_check(&c, &[1.0, 5.0], 1.0, Some(1)).unwrap();
        assert_eq!(r.radius, 0.0);
        assert!(r.trajectories.iter().all(|t| t.monotone && t.final_l2 < t.initial_l2));
        assert_eq!(r.status, VerdictStatus::Pass);
    }

    #[test]
    fn unforced_linf_decays() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.0, 1.0, 1.0, 32, 0.01, 4.0);
        c.checkpoint_every = 10;
        let out = run(&c).unwrap();
        let r = linf_boundedness_check(&out.records, 2, 1.0);
        assert_eq!(r.reference_exponent, 1.0);
        assert!(r.plateau < 0.05 * out.records[0].linf);
        assert!(r.fitted_exponent.unwrap() > 0.0);
    }

    #[test]
    fn linf_plateau_scales_inversely_with_kappa() {
        let mut plateaus = Vec::new();
        for kappa in [0.5, 1.0, 2.0] {
            let mut c = SolverConfig::new(LawKind::Sqg, 0.0, kappa, 1.0, 16, 0.05, 20.0);
            c.forcing = mode(vec![1, 1], 0.5);
            c.checkpoint_every = 10;
            let out = run(&c).unwrap();
            let r = linf_boundedness_check(&out.records, 2, 1.0);
            assert!(r.sup_after_one.is_finite());
            plateaus.push((kappa, r.plateau));
        }
        let s = linf_plateau_scaling(&plateaus);
        assert!(s.pass, "{s:?}");
    }

    #[test]
    fn grad_growth_in_linear_regime_is_flat() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.1, 0.0, 2.0, 16, 0.01, 1.0);
        c.initial_data = FieldSpec::PowerLaw {
            slope: 2.0,
            l2: 1e-8,
            seed: None,
        };
        let out = run(&c).unwrap();
        let r = grad_growth_check(&out.records, false);
        assert!(r.coefficients[1].abs() < 1e-6);
        assert_eq!(r.status, VerdictStatus::Pass);
    }

    #[test]
    fn inviscid_mg_gradient_stays_under_exponential_envelope() {
        let mut c = SolverConfig::new(LawKind::Mg, 0.5, 0.0, 2.0, 16, 0.01, 1.0);
        c.initial_data = FieldSpec::Analytic {
            tau: 0.5,
            s: 1.0,
            l2: Some(1.0),
            seed: None,
        };
        let out = run(&c).unwrap();
        let r = grad_growth_check(&out.records, false);
        assert!(r.max_excess <= GRAD_EXCESS_TOLERANCE, "{r:?}");
        c.forcing = mode(vec![1, 1, 0], 1.0);
        let out = run(&c).unwrap();
        let r = grad_growth_check(&out.records, true);
        assert_eq!(r.coefficients.len(), 3);
        assert_eq!(r.status, VerdictStatus::Pass, "{r:?}");
    }

    #[test]
    fn radius_is_constant_in_linear_regime() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.1, 0.0, 2.0, 64, 0.01, 1.0);
        c.initial_data = FieldSpec::Analytic {
            tau: 0.7,
            s: 1.0,
            l2: Some(1e-8),
            seed: None,
        };
        let theta0 = run(&SolverConfig { t_end: 0.01, ..c.clone() }).unwrap();
        let out = run(&c).unwrap();
        let a = estimate_gevrey_radius(&theta0.state.theta, 1.0).unwrap().tau;
        let b = estimate_gevrey_radius(&out.state.theta, 1.0).unwrap().tau;
        assert!(((b - a) / a).abs() < 0.05);
    }

    #[test]
    fn uniform_witness_ratio() {
        let mk = |t: f64, h1: f64| DiagnosticsRecord {
            t,
            step: 0,
            l2: 1.0,
            hs: vec![crate::diagnostics::SobolevValue { s: 1.0, value: h1 }],
            linf: 1.0,
            grad_ld: 1.0,
            energy_residual: 0.0,
            gevrey_tau: None,
            dealias_energy_fraction: 0.0,
            max_imag: 0.0,
        };
        let runs = vec![
            (0.0, vec![mk(0.5, 100.0), mk(1.0, 2.0), mk(2.0, 1.0)]),
            (1.0, vec![mk(1.0, 1.0), mk(1.5, 1.5), mk(2.5, 9.0)]),
        ];
        let w = uniform_nu_witness(&runs, [1.0, 2.0], 1.0);
        assert_eq!(w.per_nu, vec![(0.0, 2.0), (1.0, 1.5)]);
        assert!(w.pass);
    }

    #[test]
    fn energy_check_is_relative() {
        let g = make_grid(2, 16).unwrap();
        let mut f = SpectralField::zeros(&g);
        f.set_mode(&[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let mut r = crate::diagnostics::measure(&f, 0.0, 0, 0.0, &[], None);
        r.energy_residual = 1e-7;
        // ½‖θ‖² = 1
        let e = energy_residual_check(&[r], 1e-6);
        assert!((e.relative - 1e-7).abs() < 1e-20);
        assert!(e.pass);
    }
}
