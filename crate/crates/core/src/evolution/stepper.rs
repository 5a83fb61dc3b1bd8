//! Integrating-factor time stepping with a dealiased pseudo-spectral
//! advection term.
//!
//! With `L(k) = κ|k|^γ` the stiff factor `e^{-L h}` is applied exactly per mode;
//! `N̂ = -(u·∇θ)^` and `Ŝ` are treated explicitly.

use num_complex::Complex64;

use super::{EvolutionError, Integrator};
use crate::laws::{ConstitutiveLaw, Parity};
use crate::spectral::{
    sobolev_norm_sq, symbol_power, CompensatedSum, FftWorkspace, Grid, SpectralField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Initial energy `½‖θ₀‖²` and the running integrals `∫ κ‖Λ^{γ/2}θ‖²`, `∫ ⟨S, θ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBudget {
    pub initial_energy: f64,
    pub dissipation: f64,
    pub forcing: f64,
}

/// Previous explicit term for the two-step scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MultistepHistory {
    pub rhs: SpectralField,
    pub budget_rate: (f64, f64),
}

/// State of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub t: f64,
    pub step: u64,
    pub theta: SpectralField,
    pub budget: EnergyBudget,
    pub history: Option<MultistepHistory>,
}

impl EnergyBudget {
    /// `½‖θ‖² − ½‖θ₀‖² + ∫ dissipation − ∫ forcing`; zero for the exact solution.
    pub fn residual(&self, theta: &SpectralField) -> f64 {
        0.5 * sobolev_norm_sq(theta, 0.0) - self.initial_energy + self.dissipation - self.forcing
    }
}

impl StepState {
    pub fn new(theta: SpectralField) -> Self {
        let budget = EnergyBudget {
            initial_energy: 0.5 * sobolev_norm_sq(&theta, 0.0),
            ..EnergyBudget::default()
        };
        Self {
            t: 0.0,
            step: 0,
            theta,
            budget,
            history: None,
        }
    }
}

pub struct Stepper {
    grid: Grid,
    law: ConstitutiveLaw,
    kappa: f64,
    gamma: f64,
    integrator: Integrator,
    /// Storage indices of modes kept by the 2/3 rule, zero mode excluded.
    active: Vec<usize>,
    /// Active positions whose mirror index is larger (one per conjugate pair).
    pair_heads: Vec<(usize, usize)>,
    kvec: Vec<[f64; 3]>,
    symbol: Vec<[f64; 3]>,
    rate: Vec<f64>,
    forcing: Vec<Complex64>,
    dt: f64,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
    e_double: Vec<f64>,
    ws: FftWorkspace,
    bufs: [Vec<Complex64>; 3],
    stage: [Vec<Complex64>; 5],
    singular_modes: usize,
}

impl Stepper {
    pub fn new(
        grid: &Grid,
        law: ConstitutiveLaw,
        kappa: f64,
        gamma: f64,
        dt: f64,
        integrator: Integrator,
        forcing: &SpectralField,
    ) -> Result<Self, EvolutionError> {
        if grid.dim() != law.dim() {
            return Err(EvolutionError::LawDimension {
                law: law.kind,
                d: grid.dim(),
            });
        }
        let active: Vec<usize> = (1..grid.len())
            .filter(|&i| grid.is_retained(i) && !grid.is_nyquist(i))
            .collect();
        let mut position = vec![usize::MAX; grid.len()];
        for (p, &idx) in active.iter().enumerate() {
            position[idx] = p;
        }
        let pair_heads = active
            .iter()
            .enumerate()
            .filter_map(|(p, &idx)| {
                let m = grid.mirror(idx);
                (m > idx).then(|| (p, position[m]))
            })
            .collect();
        let mut singular_modes = 0;
        let mut symbol = Vec::with_capacity(active.len());
        let mut kvec = Vec::with_capacity(active.len());
        let mut rate = Vec::with_capacity(active.len());
        for &idx in &active {
            let k = grid.wavevector(idx);
            let (m, singular) = law.symbol_or_zero(&k);
            if singular {
                singular_modes += 1;
            }
            symbol.push(m);
            kvec.push([k[0] as f64, k[1] as f64, k[2] as f64]);
            rate.push(kappa * symbol_power(grid.ksq(idx), gamma));
        }
        let mut forcing_coeffs = vec![ZERO; grid.len()];
        for &idx in &active {
            forcing_coeffs[idx] = forcing.coeffs()[idx];
        }
        let len = grid.len();
        let mut stepper = Self {
            grid: grid.clone(),
            law,
            kappa,
            gamma,
            integrator,
            active,
            pair_heads,
            kvec,
            symbol,
            rate,
            forcing: forcing_coeffs,
            dt: 0.0,
            e_half: Vec::new(),
            e_full: Vec::new(),
            e_double: Vec::new(),
            ws: FftWorkspace::new(grid),
            bufs: [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]],
            stage: [
                vec![ZERO; len],
                vec![ZERO; len],
                vec![ZERO; len],
                vec![ZERO; len],
                vec![ZERO; len],
            ],
            singular_modes,
        };
        stepper.set_dt(dt);
        Ok(stepper)
    }

    pub fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
        self.e_half = self.rate.iter().map(|r| (-r * 0.5 * dt).exp()).collect();
        self.e_full = self.rate.iter().map(|r| (-r * dt).exp()).collect();
        self.e_double = self.rate.iter().map(|r| (-r * 2.0 * dt).exp()).collect();
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn law(&self) -> &ConstitutiveLaw {
        &self.law
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// MG modes on the singular set whose velocity was set to zero.
    pub fn singular_modes(&self) -> usize {
        self.singular_modes
    }

    pub fn forcing_field(&self) -> SpectralField {
        SpectralField::from_coeffs(&self.grid, self.forcing.clone()).expect("grid length")
    }

    /// `N̂ = -(u·∇θ)^` on the active modes; zero elsewhere.
    fn nonlinear_into(&mut self, theta: &[Complex64], out: &mut [Complex64]) -> Result<(), EvolutionError> {
        let odd = self.law.parity() == Parity::Odd;
        let dim = self.grid.dim();
        let [b0, b1, b2] = &mut self.bufs;
        b0.fill(ZERO);
        b1.fill(ZERO);
        if dim == 3 {
            b2.fill(ZERO);
        }
        let i = Complex64::new(0.0, 1.0);
        for (p, &idx) in self.active.iter().enumerate() {
            let c = theta[idx];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let m = self.symbol[p];
            let k = self.kvec[p];
            let ic = i * c;
            let u = if odd {
                [ic * m[0], ic * m[1], ic * m[2]]
            } else {
                [c * m[0], c * m[1], c * m[2]]
            };
            let g = [ic * k[0], ic * k[1], ic * k[2]];
            if dim == 2 {
                b0[idx] = u[0] + i * u[1];
                b1[idx] = g[0] + i * g[1];
            } else {
                b0[idx] = u[0] + i * u[1];
                b1[idx] = u[2] + i * g[0];
                b2[idx] = g[1] + i * g[2];
            }
        }
        self.ws.inverse_in_place(b0);
        self.ws.inverse_in_place(b1);
        if dim == 2 {
            for (x, y) in b0.iter_mut().zip(b1.iter()) {
                *x = Complex64::new(x.re * y.re + x.im * y.im, 0.0);
            }
        } else {
            self.ws.inverse_in_place(b2);
            for ((x, y), z) in b0.iter_mut().zip(b1.iter()).zip(b2.iter()) {
                *x = Complex64::new(x.re * y.im + x.im * z.re + y.re * z.im, 0.0);
            }
        }
        self.ws.forward_in_place(b0);
        out.fill(ZERO);
        let mut finite = true;
        for &(p, q) in &self.pair_heads {
            let a = self.active[p];
            let b = self.active[q];
            let avg = -0.5 * (b0[a] + b0[b].conj());
            finite &= avg.re.is_finite() && avg.im.is_finite();
            out[a] = avg;
            out[b] = avg.conj();
        }
        if !finite {
            return Err(EvolutionError::NonFinite);
        }
        Ok(())
    }

    /// Explicit right-hand side `N̂ + Ŝ`.
    fn rhs_into(&mut self, theta: &[Complex64], out: &mut [Complex64]) -> Result<(), EvolutionError> {
        self.nonlinear_into(theta, out)?;
        for &idx in &self.active {
            out[idx] += self.forcing[idx];
        }
        Ok(())
    }

    /// Instantaneous `(κ‖Λ^{γ/2}θ‖², ⟨S, θ⟩)`.
    fn budget_rate(&self, theta: &[Complex64]) -> (f64, f64) {
        let mut diss = CompensatedSum::new();
        let mut force = CompensatedSum::new();
        for (p, &idx) in self.active.iter().enumerate() {
            let c = theta[idx];
            diss.add(self.rate[p] * c.norm_sqr());
            let s = self.forcing[idx];
            force.add(s.re * c.re + s.im * c.im);
        }
        (diss.value(), force.value())
    }

    /// Public nonlinear term for a dealiased field.
    pub fn nonlinear_term(&mut self, theta: &SpectralField) -> Result<SpectralField, EvolutionError> {
        let mut out = vec![ZERO; self.grid.len()];
        self.nonlinear_into(theta.coeffs(), &mut out)?;
        Ok(SpectralField::from_coeffs(&self.grid, out).expect("grid length"))
    }

    /// Advance `state` by one step of size `dt`.
    pub fn step(&mut self, state: &mut StepState) -> Result<(), EvolutionError> {
        match (self.integrator, &state.history) {
            (Integrator::Ab2If, Some(_)) => self.step_ab2(state),
            _ => self.step_rk4(state),
        }
    }

    fn step_rk4(&mut self, state: &mut StepState) -> Result<(), EvolutionError> {
        let h = self.dt;
        let theta: Vec<Complex64> = state.theta.coeffs().to_vec();
        let mut stage = std::mem::take(&mut self.stage);
        let [k1, k2, k3, k4, tmp] = &mut stage;

        let r1 = self.budget_rate(&theta);
        self.rhs_into(&theta, k1)?;

        // a = E_{h/2} (θ + h/2 k1)
        tmp.fill(ZERO);
        for (p, &idx) in self.active.iter().enumerate() {
            tmp[idx] = (theta[idx] + k1[idx] * (0.5 * h)) * self.e_half[p];
        }
        let r2 = self.budget_rate(tmp);
        self.rhs_into(tmp, k2)?;

        // b = E_{h/2} θ + h/2 k2
        for (p, &idx) in self.active.iter().enumerate() {
            tmp[idx] = theta[idx] * self.e_half[p] + k2[idx] * (0.5 * h);
        }
        let r3 = self.budget_rate(tmp);
        self.rhs_into(tmp, k3)?;

        // c = E_h θ + h E_{h/2} k3
        for (p, &idx) in self.active.iter().enumerate() {
            tmp[idx] = theta[idx] * self.e_full[p] + k3[idx] * (h * self.e_half[p]);
        }
        let r4 = self.budget_rate(tmp);
        self.rhs_into(tmp, k4)?;

        let coeffs = state.theta.coeffs_mut();
        coeffs.fill(ZERO);
        for (p, &idx) in self.active.iter().enumerate() {
            let eh = self.e_half[p];
            let ef = self.e_full[p];
            coeffs[idx] = theta[idx] * ef
                + (k1[idx] * ef + (k2[idx] + k3[idx]) * (2.0 * eh) + k4[idx]) * (h / 6.0);
        }

        state.budget.dissipation += h / 6.0 * (r1.0 + 2.0 * r2.0 + 2.0 * r3.0 + r4.0);
        state.budget.forcing += h / 6.0 * (r1.1 + 2.0 * r2.1 + 2.0 * r3.1 + r4.1);
        if self.integrator == Integrator::Ab2If {
            state.history = Some(MultistepHistory {
                rhs: SpectralField::from_coeffs(&self.grid, k1.clone()).expect("grid length"),
                budget_rate: r1,
            });
        }
        self.stage = stage;
        state.t += h;
        state.step += 1;
        Ok(())
    }

    fn step_ab2(&mut self, state: &mut StepState) -> Result<(), EvolutionError> {
        let h = self.dt;
        let history = state.history.take().expect("AB2 needs history");
        let mut stage = std::mem::take(&mut self.stage);
        let [k1, _, _, _, _] = &mut stage;
        let theta = state.theta.coeffs().to_vec();
        let r1 = self.budget_rate(&theta);
        self.rhs_into(&theta, k1)?;
        let prev = history.rhs.coeffs();
        let coeffs = state.theta.coeffs_mut();
        coeffs.fill(ZERO);
        for (p, &idx) in self.active.iter().enumerate() {
            coeffs[idx] = theta[idx] * self.e_full[p]
                + (k1[idx] * (1.5 * self.e_full[p]) - prev[idx] * (0.5 * self.e_double[p])) * h;
        }
        let r0 = history.budget_rate;
        state.budget.dissipation += h * (1.5 * r1.0 - 0.5 * r0.0);
        state.budget.forcing += h * (1.5 * r1.1 - 0.5 * r0.1);
        state.history = Some(MultistepHistory {
            rhs: SpectralField::from_coeffs(&self.grid, k1.clone()).expect("grid length"),
            budget_rate: r1,
        });
        self.stage = stage;
        state.t += h;
        state.step += 1;
        Ok(())
    }
}
