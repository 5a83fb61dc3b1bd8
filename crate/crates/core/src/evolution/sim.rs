use super::{build_field, EvolutionError, SolverConfig, StepState, Stepper, CFL_LIMIT};
use crate::diagnostics::{measure, DiagnosticsRecord};
use crate::laws::compute_velocity;
use crate::spectral::{inverse_pair, inverse, make_grid, sobolev_norm, SpectralField, VectorField};

/// Runs stop once `‖θ‖_{H¹}` passes this value.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

const MAX_HALVINGS: u32 = 30;

/// One trajectory: configuration, stepper, and current state.
pub struct Simulation {
    config: SolverConfig,
    stepper: Stepper,
    state: StepState,
    warnings: Vec<String>,
}

/// Final state and diagnostics of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub state: StepState,
    pub records: Vec<DiagnosticsRecord>,
    pub warnings: Vec<String>,
    pub dt: f64,
}

impl Simulation {
    /// Build initial data and forcing from the config.
    pub fn new(config: &SolverConfig) -> Result<Self, EvolutionError> {
        config.validate()?;
        let grid = make_grid(config.d, config.n)?;
        let theta0 = build_field(&config.initial_data, &grid, config.seed)?;
        Self::with_initial(config, theta0)
    }

    /// Start from an explicit initial datum (dealiased, zero mean).
    pub fn with_initial(config: &SolverConfig, theta0: SpectralField) -> Result<Self, EvolutionError> {
        config.validate()?;
        let mut sim = Self::assemble(config, StepState::new(theta0), config.dt)?;
        let mut estimate = sim.cfl_estimate();
        if estimate > CFL_LIMIT {
            if config.auto_halve_dt {
                let mut dt = config.dt;
                let mut halvings = 0;
                while estimate > CFL_LIMIT && halvings < MAX_HALVINGS {
                    dt *= 0.5;
                    estimate *= 0.5;
                    halvings += 1;
                }
                sim.stepper.set_dt(dt);
                sim.warn(format!(
                    "CFL estimate exceeded {CFL_LIMIT}; dt halved {halvings} times to {dt}"
                ));
            } else {
                sim.warn(format!(
                    "CFL estimate {estimate:.3} exceeds {CFL_LIMIT} at t = 0; consider a smaller dt"
                ));
            }
        }
        Ok(sim)
    }

    /// Continue from a saved state with step size `dt`.
    pub fn from_state(config: &SolverConfig, state: StepState, dt: f64) -> Result<Self, EvolutionError> {
        config.validate()?;
        Self::assemble(config, state, dt)
    }

    fn assemble(config: &SolverConfig, state: StepState, dt: f64) -> Result<Self, EvolutionError> {
        let grid = state.theta.grid().clone();
        if grid.dim() != config.d || grid.n() != config.n {
            return Err(EvolutionError::InvalidConfig(format!(
                "state lives on a {}-dimensional n = {} grid, config asks for d = {}, n = {}",
                grid.dim(),
                grid.n(),
                config.d,
                config.n
            )));
        }
        let forcing = build_field(&config.forcing, &grid, config.seed.wrapping_add(1))?;
        let stepper = Stepper::new(
            &grid,
            config.constitutive_law(),
            config.kappa,
            config.gamma,
            dt,
            config.integrator,
            &forcing,
        )?;
        let mut sim = Self {
            config: config.clone(),
            stepper,
            state,
            warnings: Vec::new(),
        };
        if sim.stepper.singular_modes() > 0 {
            sim.warn(format!(
                "{} MG modes with k2 = k3 = 0 have zero velocity (singular symbol)",
                sim.stepper.singular_modes()
            ));
        }
        Ok(sim)
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &StepState {
        &self.state
    }

    pub fn into_state(self) -> StepState {
        self.state
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn stepper_mut(&mut self) -> &mut Stepper {
        &mut self.stepper
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt()
    }

    pub fn forcing(&self) -> SpectralField {
        self.stepper.forcing_field()
    }

    /// Velocity of the current state.
    pub fn velocity(&self) -> VectorField {
        compute_velocity(self.stepper.law(), &self.state.theta).expect("dimension checked at construction")
    }

    /// `dt · max|k| · max|u|` over retained modes.
    pub fn cfl_estimate(&self) -> f64 {
        let u = self.velocity();
        let comps = u.components();
        let mut umax = 0.0f64;
        let (a, b) = inverse_pair(&comps[0], &comps[1]);
        let c = comps.get(2).map(inverse);
        for i in 0..a.len() {
            let mut sq = a[i] * a[i] + b[i] * b[i];
            if let Some(c) = &c {
                sq += c[i] * c[i];
            }
            umax = umax.max(sq);
        }
        let grid = self.state.theta.grid();
        let kmax = grid.dealias_cutoff() as f64 * (grid.dim() as f64).sqrt();
        self.dt() * kmax * umax.sqrt()
    }

    pub fn total_steps(&self) -> u64 {
        (self.config.t_end / self.dt()).round() as u64
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.total_steps()
    }

    /// Advance one step; non-finite values or `‖θ‖_{H¹} > 1e12` end the run.
    pub fn step(&mut self) -> Result<(), EvolutionError> {
        let outcome = self.stepper.step(&mut self.state);
        self.state.t = self.state.step as f64 * self.dt();
        let reason = match outcome {
            Err(EvolutionError::NonFinite) => Some("NaN in the nonlinear product".to_string()),
            Err(e) => return Err(e),
            Ok(()) => {
                let h1 = sobolev_norm(&self.state.theta, 1.0);
                if !h1.is_finite() {
                    Some("non-finite H1 norm".to_string())
                } else if h1 > BLOWUP_THRESHOLD {
                    Some(format!("H1 norm {h1:e} above {BLOWUP_THRESHOLD:e}"))
                } else {
                    None
                }
            }
        };
        match reason {
            Some(reason) => Err(EvolutionError::BlowUp {
                t: self.state.t,
                step: self.state.step,
                reason,
                records: Vec::new(),
            }),
            None => Ok(()),
        }
    }

    /// Diagnostics of the current state.
    pub fn record(&self) -> DiagnosticsRecord {
        measure(
            &self.state.theta,
            self.state.t,
            self.state.step,
            self.state.budget.residual(&self.state.theta),
            &self.config.sobolev_s,
            self.config.gevrey_s,
        )
    }

    fn is_checkpoint(&self) -> bool {
        self.state.step % self.config.checkpoint_every == 0 || self.is_finished()
    }

    /// Step until `target` (capped at the final step), pushing a record at
    /// every checkpoint passed.
    pub fn advance_to(&mut self, target: u64, records: &mut Vec<DiagnosticsRecord>) -> Result<(), EvolutionError> {
        let target = target.min(self.total_steps());
        while self.state.step < target {
            if let Err(e) = self.step() {
                return Err(attach(e, records));
            }
            if self.is_checkpoint() {
                records.push(self.record());
            }
        }
        Ok(())
    }

    /// Run to `t_end`. The series starts with the current state.
    pub fn run_to_end(&mut self) -> Result<Vec<DiagnosticsRecord>, EvolutionError> {
        let mut records = vec![self.record()];
        self.advance_to(self.total_steps(), &mut records)?;
        Ok(records)
    }
}

fn attach(e: EvolutionError, records: &[DiagnosticsRecord]) -> EvolutionError {
    match e {
        EvolutionError::BlowUp { t, step, reason, .. } => EvolutionError::BlowUp {
            t,
            step,
            reason,
            records: records.to_vec(),
        },
        other => other,
    }
}

/// Run `config` from its initial data to `t_end`.
pub fn run(config: &SolverConfig) -> Result<RunOutput, EvolutionError> {
    let mut sim = Simulation::new(config)?;
    let records = sim.run_to_end()?;
    Ok(RunOutput {
        dt: sim.dt(),
        warnings: sim.warnings.clone(),
        state: sim.into_state(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{FieldSpec, Integrator, ModeSpec};
    use crate::laws::{ConstitutiveLaw, LawKind};
    use crate::spectral::{inner_product, symbol_power};
    use num_complex::Complex64;

    fn single_mode(k: Vec<i64>, re: f64) -> FieldSpec {
        FieldSpec::Modes {
            modes: vec![ModeSpec { k, re, im: 0.0 }],
        }
    }

    #[test]
    fn single_mode_decays_by_heat_factor() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.1, 1.0, 2.0, 16, 0.1, 0.1);
        c.initial_data = single_mode(vec![1, 0], 0.5);
        let out = run(&c).unwrap();
        let a = out.state.theta.coeff(&[1, 0]).unwrap();
        assert!((a.re - 0.5 * (-0.1f64).exp()).abs() < 1e-15);
        assert!(a.im.abs() < 1e-15);
    }

    #[test]
    fn sqg_single_mode_has_no_advection() {
        let g = make_grid(2, 16).unwrap();
        let mut theta = SpectralField::zeros(&g);
        theta.set_mode(&[0, 1], Complex64::new(0.5, 0.0)).unwrap();
        let law = ConstitutiveLaw::new(LawKind::Sqg, 0.0).unwrap();
        let mut st = Stepper::new(&g, law, 0.0, 1.0, 0.01, Integrator::Rk4If, &SpectralField::zeros(&g)).unwrap();
        let n = st.nonlinear_term(&theta).unwrap();
        assert!(n.coeffs().iter().all(|c| c.norm() < 1e-16));
        let zero = st.nonlinear_term(&SpectralField::zeros(&g)).unwrap();
        assert!(zero.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn advection_is_skew_symmetric() {
        for (kind, n) in [(LawKind::Sqg, 32), (LawKind::Ipmb, 32), (LawKind::Mg, 16)] {
            for nu in [0.0, 0.1] {
                let law = ConstitutiveLaw::new(kind, nu).unwrap();
                let g = make_grid(kind.dim(), n).unwrap();
                let mut st =
                    Stepper::new(&g, law, 0.0, 1.0, 0.01, Integrator::Rk4If, &SpectralField::zeros(&g)).unwrap();
                for seed in 0..20 {
                    let theta = build_field(&FieldSpec::default(), &g, seed).unwrap();
                    let nl = st.nonlinear_term(&theta).unwrap();
                    let flux = inner_product(&nl, &theta) / inner_product(&theta, &theta);
                    assert!(flux.abs() < 1e-10, "{kind} nu={nu} seed={seed}: {flux:e}");
                    assert_eq!(nl.coeffs()[0], Complex64::new(0.0, 0.0));
                    assert_eq!(nl.hermitian_defect(), 0.0);
                }
            }
        }
    }

    #[test]
    fn inviscid_run_conserves_l2() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.1, 0.0, 1.0, 32, 1e-3, 0.1);
        c.seed = 7;
        let out = run(&c).unwrap();
        let first = out.records.first().unwrap().l2;
        let last = out.records.last().unwrap().l2;
        assert_eq!(out.state.step, 100);
        assert!(((last * last - first * first) / (first * first)).abs() <= 1e-8);
    }

    #[test]
    fn forced_linear_regime_matches_exact_solution() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.1, 0.5, 1.5, 16, 0.01, 1.0);
        c.initial_data = FieldSpec::Zero;
        c.forcing = FieldSpec::PowerLaw {
            slope: 1.0,
            l2: 1e-7,
            seed: Some(3),
        };
        let out = run(&c).unwrap();
        let g = out.state.theta.grid().clone();
        let forcing = build_field(&c.forcing, &g, 0).unwrap();
        let mut worst = 0.0f64;
        for idx in 1..g.len() {
            let s = forcing.coeffs()[idx];
            if s.norm() == 0.0 {
                continue;
            }
            let rate = c.kappa * symbol_power(g.ksq(idx), c.gamma);
            let exact = s * ((1.0 - (-rate * c.t_end).exp()) / rate);
            worst = worst.max((out.state.theta.coeffs()[idx] - exact).norm() / exact.norm());
        }
        assert!(worst < 1e-6, "{worst:e}");
    }

    #[test]
    fn dissipative_mg_l2_is_nonincreasing() {
        let mut c = SolverConfig::new(LawKind::Mg, 0.1, 1.0, 2.0, 12, 0.01, 5.0);
        c.checkpoint_every = 25;
        let out = run(&c).unwrap();
        assert!(out.records.windows(2).all(|w| w[1].l2 <= w[0].l2));
        assert!(out.records.iter().all(|r| r.max_imag < 1e-10));
        assert_eq!(out.state.theta.coeffs()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.05, 0.1, 1.0, 16, 0.01, 0.2);
        c.forcing = single_mode(vec![1, 2], 0.3);
        c.integrator = Integrator::Ab2If;
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn records_follow_checkpoint_spacing() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.0, 0.1, 1.0, 16, 0.01, 0.25);
        c.checkpoint_every = 10;
        let out = run(&c).unwrap();
        let steps: Vec<u64> = out.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 25]);
        assert!(out.records.windows(2).all(|w| w[1].t > w[0].t));
    }

    fn final_state(c: &SolverConfig) -> SpectralField {
        run(c).unwrap().state.theta
    }

    fn observed_order(integrator: Integrator, dt: f64) -> f64 {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.1, 0.2, 1.0, 16, dt, 0.4);
        c.integrator = integrator;
        c.initial_data = FieldSpec::Analytic {
            tau: 0.5,
            s: 1.0,
            l2: Some(1.0),
            seed: Some(1),
        };
        let a = final_state(&c);
        c.dt = dt / 2.0;
        let b = final_state(&c);
        c.dt = dt / 4.0;
        let d = final_state(&c);
        let e1 = crate::spectral::sobolev_norm(&a.sub(&b), 0.0);
        let e2 = crate::spectral::sobolev_norm(&b.sub(&d), 0.0);
        (e1 / e2).log2()
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = observed_order(Integrator::Rk4If, 0.02);
        assert!(p >= 3.5, "{p}");
    }

    #[test]
    fn ab2_is_second_order() {
        let p = observed_order(Integrator::Ab2If, 0.01);
        assert!((1.8..2.3).contains(&p), "{p}");
    }

    #[test]
    fn energy_budget_closes() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.0, 1.0, 2.0, 32, 1e-3, 0.3);
        c.forcing = single_mode(vec![2, 1], 0.5);
        c.initial_data = FieldSpec::Analytic {
            tau: 0.3,
            s: 1.0,
            l2: Some(1.0),
            seed: None,
        };
        let out = run(&c).unwrap();
        let emax = out.records.iter().map(|r| 0.5 * r.l2 * r.l2).fold(0.0, f64::max);
        for r in &out.records {
            assert!(r.energy_residual.abs() <= 1e-6 * emax, "{r:?}");
        }
    }

    #[test]
    fn divergence_is_reported_as_blow_up() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.0, 0.0, 1.0, 32, 0.5, 50.0);
        c.initial_data = FieldSpec::PowerLaw {
            slope: 0.5,
            l2: 1e4,
            seed: None,
        };
        c.checkpoint_every = 1;
        match run(&c) {
            Err(EvolutionError::BlowUp { step, records, .. }) => {
                assert!(step >= 1);
                assert_eq!(records.len() as u64, step);
            }
            other => panic!("expected blow-up, got {:?}", other.map(|o| o.state.step)),
        }
    }

    #[test]
    fn cfl_warning_and_auto_halving() {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.0, 0.0, 1.0, 32, 0.5, 1.0);
        c.initial_data = FieldSpec::PowerLaw {
            slope: 2.0,
            l2: 10.0,
            seed: None,
        };
        let sim = Simulation::new(&c).unwrap();
        assert!(sim.cfl_estimate() > CFL_LIMIT);
        assert_eq!(sim.warnings().len(), 1);
        c.auto_halve_dt = true;
        let sim = Simulation::new(&c).unwrap();
        assert!(sim.cfl_estimate() <= CFL_LIMIT);
        assert!(sim.dt() < 0.5);
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let mut c = SolverConfig::new(LawKind::Ipmb, 0.1, 0.1, 1.0, 16, 0.01, 0.3);
        c.integrator = Integrator::Ab2If;
        c.forcing = single_mode(vec![1, 1], 0.2);
        let full = run(&c).unwrap();
        let mut sim = Simulation::new(&c).unwrap();
        let mut records = vec![sim.record()];
        sim.advance_to(13, &mut records).unwrap();
        let dt = sim.dt();
        let mut resumed = Simulation::from_state(&c, sim.into_state(), dt).unwrap();
        resumed.advance_to(u64::MAX, &mut records).unwrap();
        assert_eq!(resumed.state(), &full.state);
        assert_eq!(records, full.records);
    }
}
