use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, VerdictStatus};
use crate::fit::linear_fit;
use crate::spectral::{gevrey_norm, SpectralField};

/// Amplitudes below this are treated as round-off.
pub const AMPLITUDE_FLOOR: f64 = 1e-14;
/// The fit starts at the first shell below this fraction of the peak.
pub const PEAK_FRACTION: f64 = 0.1;
pub const MIN_SHELLS: usize = 4;

/// Radius fitted to `|θ̂(k)| ~ A e^{-τ|k|^{1/s}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyEstimate {
    pub tau: f64,
    pub s: f64,
    /// Largest absolute residual of the log-amplitude fit.
    pub residual: f64,
    pub r_squared: f64,
    /// First and last shell used (shell = nearest integer to `|k|`).
    pub shell_range: [u32; 2],
    pub shells_used: usize,
}

/// Estimate the Gevrey radius from the decay of the per-shell maximum amplitude.
pub fn estimate_gevrey_radius(theta: &SpectralField, s: f64) -> Result<GevreyEstimate, DiagnosticsError> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(DiagnosticsError::InvalidInput(format!("gevrey index s = {s} must be >= 1")));
    }
    let grid = theta.grid();
    // per shell: (max amplitude, |k| of that mode)
    let mut shells: Vec<(f64, f64)> = Vec::new();
    for (idx, c) in theta.coeffs().iter().enumerate().skip(1) {
        if !grid.is_retained(idx) || grid.is_nyquist(idx) {
            continue;
        }
        let k = (grid.ksq(idx) as f64).sqrt();
        let shell = k.round() as usize;
        if shells.len() <= shell {
            shells.resize(shell + 1, (0.0, 0.0));
        }
        let a = c.norm();
        if a > shells[shell].0 {
            shells[shell] = (a, k);
        }
    }
    let peak_shell = (1..shells.len())
        .max_by(|&a, &b| shells[a].0.total_cmp(&shells[b].0))
        .ok_or(DiagnosticsError::InsufficientDecay { usable: 0 })?;
    let peak = shells[peak_shell].0;
    let start = (peak_shell..shells.len()).find(|&j| shells[j].0 < PEAK_FRACTION * peak);
    let Some(start) = start else {
        return Err(DiagnosticsError::InsufficientDecay { usable: 0 });
    };
    let end = (start..shells.len())
        .take_while(|&j| shells[j].0 >= AMPLITUDE_FLOOR)
        .last();
    let Some(end) = end else {
        return Err(DiagnosticsError::InsufficientDecay { usable: 0 });
    };
    let used = end - start + 1;
    if used < MIN_SHELLS {
        return Err(DiagnosticsError::InsufficientDecay { usable: used });
    }
    let x: Vec<f64> = (start..=end).map(|j| -shells[j].1.powf(1.0 / s)).collect();
    let y: Vec<f64> = (start..=end).map(|j| shells[j].0.ln()).collect();
    let fit = linear_fit(&x, &y).ok_or(DiagnosticsError::InsufficientDecay { usable: used })?;
    Ok(GevreyEstimate {
        tau: fit.slope.max(0.0),
        s,
        residual: fit.max_abs_residual,
        r_squared: fit.r_squared,
        shell_range: [start as u32, end as u32],
        shells_used: used,
    })
}

/// Shape check of the radius lower bound `τ(t) ≥ τ₀ e^{-C M t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusVerdict {
    pub status: VerdictStatus,
    pub tau0: f64,
    pub min_tau: f64,
    /// `-d log τ̂ / dt` from a linear fit.
    pub decay_constant: f64,
    /// Largest deviation of `log τ̂` from the fitted line.
    pub fit_residual: f64,
    pub relative_residual: f64,
    /// `‖e^{τ₀Λ^{1/s}}θ₀‖ + 2‖e^{τ₀Λ^{1/s}}S‖`.
    pub prefactor: Option<f64>,
    /// Smallest `C` consistent with the fitted decay.
    pub implied_c: Option<f64>,
}

/// Tolerance on the deviation of `log τ̂` from a straight line.
pub const LOG_TAU_TOLERANCE: f64 = 0.1;

/// Fit `log τ̂(t)`; passes when every estimate is positive and the series
/// stays within [`LOG_TAU_TOLERANCE`] of a line.
pub fn check_radius_lower_bound(
    series: &[(f64, GevreyEstimate)],
    theta0: Option<&SpectralField>,
    forcing: Option<&SpectralField>,
    s: f64,
) -> Result<RadiusVerdict, DiagnosticsError> {
    if series.len() < 3 {
        return Err(DiagnosticsError::InvalidInput(format!(
            "radius series has {} points, need at least 3",
            series.len()
        )));
    }
    let tau0 = series[0].1.tau;
    let min_tau = series.iter().map(|(_, e)| e.tau).fold(f64::INFINITY, f64::min);
    if min_tau <= 0.0 {
        return Ok(RadiusVerdict {
            status: VerdictStatus::Fail,
            tau0,
            min_tau,
            decay_constant: f64::NAN,
            fit_residual: f64::NAN,
            relative_residual: f64::NAN,
            prefactor: None,
            implied_c: None,
        });
    }
    let t: Vec<f64> = series.iter().map(|(t, _)| *t).collect();
    let y: Vec<f64> = series.iter().map(|(_, e)| e.tau.ln()).collect();
    let fit = linear_fit(&t, &y).ok_or_else(|| DiagnosticsError::InvalidInput("degenerate time axis".into()))?;
    let decay_constant = -fit.slope;
    let relative_residual = super::relative_residual(fit.max_abs_residual, &y);

    let norm = |f: Option<&SpectralField>| -> Option<f64> {
        match f {
            Some(f) => gevrey_norm(f, tau0, s, 0.0).ok(),
            None => Some(0.0),
        }
    };
    let prefactor = match (theta0, norm(theta0), norm(forcing)) {
        (Some(_), Some(a), Some(b)) => Some(a + 2.0 * b),
        _ => None,
    };
    let implied_c = prefactor.filter(|&p| p > 0.0).map(|p| decay_constant.max(0.0) / p);
    let pass = fit.max_abs_residual <= LOG_TAU_TOLERANCE;
    Ok(RadiusVerdict {
        status: VerdictStatus::classify(pass, relative_residual),
        tau0,
        min_tau,
        decay_constant,
        fit_residual: fit.max_abs_residual,
        relative_residual,
        prefactor,
        implied_c,
    })
}
