//! Construction of initial data and forcing from a [`FieldSpec`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvolutionError, FieldSpec};
use crate::spectral::{dealias, project_zero_mean, sobolev_norm, Grid, SpectralField};

/// Build a real, zero-mean, dealiased field. `default_seed` is used when the
/// field description carries none.
pub fn build_field(spec: &FieldSpec, grid: &Grid, default_seed: u64) -> Result<SpectralField, EvolutionError> {
    let field = match spec {
        FieldSpec::Zero => SpectralField::zeros(grid),
        FieldSpec::Modes { modes } => {
            let mut f = SpectralField::zeros(grid);
            for m in modes {
                if m.k.len() != grid.dim() {
                    return Err(EvolutionError::InvalidConfig(format!(
                        "mode {:?} has {} components, grid is {}-dimensional",
                        m.k,
                        m.k.len(),
                        grid.dim()
                    )));
                }
                f.set_mode(&m.k, Complex64::new(m.re, m.im))
                    .map_err(EvolutionError::Spectral)?;
            }
            f
        }
        FieldSpec::PowerLaw { slope, l2, seed } => {
            let f = random_phases(grid, seed.unwrap_or(default_seed), |ksq| {
                (ksq as f64).powf(-0.5 * slope)
            });
            normalized(f, *l2)?
        }
        FieldSpec::Analytic { tau, s, l2, seed } => {
            if !(*tau >= 0.0) || !(*s >= 1.0) {
                return Err(EvolutionError::InvalidConfig(format!(
                    "analytic data needs tau >= 0 and s >= 1 (got tau = {tau}, s = {s})"
                )));
            }
            let f = random_phases(grid, seed.unwrap_or(default_seed), |ksq| {
                (-tau * (ksq as f64).powf(0.5 / s)).exp()
            });
            match l2 {
                Some(l2) => normalized(f, *l2)?,
                None => f,
            }
        }
    };
    let out = project_zero_mean(&dealias(&field));
    if !out.is_finite() {
        return Err(EvolutionError::InvalidConfig("field spec produced non-finite values".into()));
    }
    Ok(out)
}

/// Hermitian-paired random phases over retained, non-Nyquist modes.
fn random_phases(grid: &Grid, seed: u64, amplitude: impl Fn(i64) -> f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for idx in 1..grid.len() {
        let m = grid.mirror(idx);
        if m <= idx || !grid.is_retained(idx) || grid.is_nyquist(idx) {
            continue;
        }
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let c = Complex64::from_polar(amplitude(grid.ksq(idx)), phase);
        let coeffs = f.coeffs_mut();
        coeffs[idx] = c;
        coeffs[m] = c.conj();
    }
    f
}

fn normalized(mut f: SpectralField, l2: f64) -> Result<SpectralField, EvolutionError> {
    if !(l2 >= 0.0) {
        return Err(EvolutionError::InvalidConfig(format!("l2 = {l2} must be >= 0")));
    }
    let norm = sobolev_norm(&dealias(&f), 0.0);
    if norm > 0.0 {
        f.scale(l2 / norm);
    }
    Ok(f)
}
