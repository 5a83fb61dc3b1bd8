use serde::{Deserialize, Serialize};

use super::EvolutionError;
use crate::laws::{ConstitutiveLaw, LawKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Integrator {
    /// Classical RK4 on the integrating-factor variable.
    #[default]
    #[serde(rename = "rk4-if")]
    Rk4If,
    /// Adams-Bashforth 2 on the integrating-factor variable, started by one RK4 step.
    #[serde(rename = "ab2-if")]
    Ab2If,
}

/// One explicit Fourier coefficient; its conjugate partner is filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// How to build an initial datum or forcing term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    /// Explicit coefficient list.
    Modes { modes: Vec<ModeSpec> },
    /// Random phases with `|θ̂(k)| ∝ |k|^{-slope}`.
    PowerLaw {
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "default_l2")]
        l2: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Random phases with `|θ̂(k)| ∝ e^{-τ|k|^{1/s}}` (Gevrey class `s`, radius `τ`).
    Analytic {
        tau: f64,
        #[serde(default = "default_gevrey_s")]
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l2: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn default_slope() -> f64 {
    2.0
}

fn default_l2() -> f64 {
    1.0
}

fn default_gevrey_s() -> f64 {
    1.0
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::PowerLaw {
            slope: default_slope(),
            l2: default_l2(),
            seed: None,
        }
    }
}

fn default_integrator() -> Integrator {
    Integrator::Rk4If
}

fn default_checkpoint_every() -> u64 {
    10
}

fn default_sobolev() -> Vec<f64> {
    vec![1.0]
}

fn zero_forcing() -> FieldSpec {
    FieldSpec::Zero
}

/// Full description of a single trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub law: LawKind,
    pub nu: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub d: usize,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default)]
    pub initial_data: FieldSpec,
    #[serde(default = "zero_forcing")]
    pub forcing: FieldSpec,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub seed: u64,
    /// Sobolev indices recorded at every checkpoint.
    #[serde(default = "default_sobolev")]
    pub sobolev_s: Vec<f64>,
    /// Gevrey index for radius estimates; none disables them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gevrey_s: Option<f64>,
    /// Halve `dt` until the start-up CFL estimate is satisfied.
    #[serde(default)]
    pub auto_halve_dt: bool,
}

/// Advisory CFL limit on `dt · max|k| · max|u|`.
pub const CFL_LIMIT: f64 = 0.5;

impl SolverConfig {
    /// Defaults for everything but the physics and discretization.
    #[allow(clippy::too_many_arguments)]
    pub fn new(law: LawKind, nu: f64, kappa: f64, gamma: f64, n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            law,
            nu,
            kappa,
            gamma,
            d: law.dim(),
            n,
            dt,
            t_end,
            integrator: Integrator::Rk4If,
            initial_data: FieldSpec::default(),
            forcing: FieldSpec::Zero,
            checkpoint_every: default_checkpoint_every(),
            seed: 0,
            sobolev_s: default_sobolev(),
            gevrey_s: None,
            auto_halve_dt: false,
        }
    }

    pub fn constitutive_law(&self) -> ConstitutiveLaw {
        ConstitutiveLaw {
            kind: self.law,
            nu: self.nu,
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        use EvolutionError as E;
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return Err(E::GammaOutOfRange(self.gamma));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(E::NegativeKappa(self.kappa));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(E::NegativeNu(self.nu));
        }
        if self.d != self.law.dim() {
            return Err(E::LawDimension {
                law: self.law,
                d: self.d,
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(E::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(E::InvalidConfig(format!("t_end = {} must be positive", self.t_end)));
        }
        if self.checkpoint_every == 0 {
            return Err(E::InvalidConfig("checkpoint_every must be at least 1".into()));
        }
        if let Some(s) = self.gevrey_s {
            if !(s >= 1.0 && s.is_finite()) {
                return Err(E::InvalidConfig(format!("gevrey_s = {s} must be >= 1")));
            }
        }
        crate::spectral::make_grid(self.d, self.n).map_err(E::Spectral)?;
        Ok(())
    }

    /// Number of steps to reach `t_end` from zero.
    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = SolverConfig::new(LawKind::Sqg, 0.1, 1.0, 1.0, 64, 1e-3, 1.0);
        c.validate().unwrap();
        assert_eq!(c.total_steps(), 1000);
    }

    #[test]
    fn gamma_range() {
        let c = SolverConfig::new(LawKind::Sqg, 0.1, 1.0, 2.5, 64, 1e-3, 1.0);
        assert!(matches!(c.validate(), Err(EvolutionError::GammaOutOfRange(_))));
    }

    #[test]
    fn law_dimension() {
        let mut c = SolverConfig::new(LawKind::Mg, 0.1, 1.0, 2.0, 16, 1e-3, 1.0);
        c.d = 2;
        assert!(matches!(c.validate(), Err(EvolutionError::LawDimension { .. })));
    }
}
