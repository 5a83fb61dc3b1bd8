use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gevrey::estimate_gevrey_radius;
use crate::spectral::{
    derivative, inverse, inverse_complex, inverse_pair, sobolev_norm, sobolev_norm_sq, CompensatedSum,
    SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevValue {
    pub s: f64,
    pub value: f64,
}

/// Observables measured at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    pub l2: f64,
    pub hs: Vec<SobolevValue>,
    pub linf: f64,
    /// `‖∇θ‖_{L^d}` under the normalized measure.
    pub grad_ld: f64,
    /// `½‖θ‖² − ½‖θ₀‖² + ∫ κ‖Λ^{γ/2}θ‖² − ∫ ⟨S, θ⟩`.
    pub energy_residual: f64,
    pub gevrey_tau: Option<f64>,
    /// Share of the energy carried by retained modes with `|k| > 2K/3`, `K = n/3`.
    pub dealias_energy_fraction: f64,
    /// Largest imaginary part left by the inverse transform.
    pub max_imag: f64,
}

impl DiagnosticsRecord {
    pub fn sobolev(&self, s: f64) -> Option<f64> {
        self.hs.iter().find(|h| h.s == s).map(|h| h.value)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.l2.is_finite()
            && self.hs.iter().all(|h| h.value.is_finite())
            && self.linf.is_finite()
            && self.grad_ld.is_finite()
            && self.energy_residual.is_finite()
            && self.gevrey_tau.map_or(true, f64::is_finite)
            && self.dealias_energy_fraction.is_finite()
            && self.max_imag.is_finite()
    }
}

/// Measure `theta` at time `t`.
pub fn measure(
    theta: &SpectralField,
    t: f64,
    step: u64,
    energy_residual: f64,
    sobolev_s: &[f64],
    gevrey_s: Option<f64>,
) -> DiagnosticsRecord {
    let grid = theta.grid();
    let physical = inverse_complex(theta);
    let mut linf = 0.0f64;
    let mut max_imag = 0.0f64;
    for z in &physical {
        linf = linf.max(z.re.abs());
        max_imag = max_imag.max(z.im.abs());
    }

    let d = grid.dim();
    let (g1, g2) = inverse_pair(&derivative(theta, 0), &derivative(theta, 1));
    let g3 = (d == 3).then(|| inverse(&derivative(theta, 2)));
    let mut acc = CompensatedSum::new();
    for i in 0..grid.len() {
        let mut sq = g1[i] * g1[i] + g2[i] * g2[i];
        if let Some(g3) = &g3 {
            sq += g3[i] * g3[i];
        }
        acc.add(if d == 2 { sq } else { sq * sq.sqrt() });
    }
    let grad_ld = (acc.value() / grid.len() as f64).powf(1.0 / d as f64);

    let cutoff = grid.dealias_cutoff() as f64;
    let threshold = (2.0 * cutoff / 3.0).powi(2);
    let mut total = CompensatedSum::new();
    let mut top = CompensatedSum::new();
    for (idx, c) in theta.coeffs().iter().enumerate().skip(1) {
        if !grid.is_retained(idx) {
            continue;
        }
        let e = c.norm_sqr();
        total.add(e);
        if grid.ksq(idx) as f64 > threshold {
            top.add(e);
        }
    }
    let dealias_energy_fraction = if total.value() > 0.0 {
        top.value() / total.value()
    } else {
        0.0
    };

    DiagnosticsRecord {
        t,
        step,
        l2: sobolev_norm_sq(theta, 0.0).sqrt(),
        hs: sobolev_s
            .iter()
            .map(|&s| SobolevValue {
                s,
                value: sobolev_norm(theta, s),
            })
            .collect(),
        linf,
        grad_ld,
        energy_residual,
        gevrey_tau: gevrey_s.and_then(|s| estimate_gevrey_radius(theta, s).ok().map(|e| e.tau)),
        dealias_energy_fraction,
        max_imag,
    }
}

fn sobolev_column(s: f64) -> String {
    format!("h{s}")
}

/// CSV header for a series recorded with the given Sobolev indices.
pub fn csv_header(sobolev_s: &[f64]) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "l2".to_string()];
    cols.extend(sobolev_s.iter().map(|&s| sobolev_column(s)));
    cols.extend(
        [
            "linf",
            "grad_ld",
            "energy_residual",
            "gevrey_tau",
            "dealias_energy_fraction",
            "step",
            "max_imag",
        ]
        .map(String::from),
    );
    cols
}

/// Write `records` as CSV with a header row.
pub fn write_csv<W: Write>(records: &[DiagnosticsRecord], sobolev_s: &[f64], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(sobolev_s))?;
    for r in records {
        let mut row = vec![r.t.to_string(), r.l2.to_string()];
        for &s in sobolev_s {
            row.push(r.sobolev(s).map(|v| v.to_string()).unwrap_or_default());
        }
        row.push(r.linf.to_string());
        row.push(r.grad_ld.to_string());
        row.push(r.energy_residual.to_string());
        row.push(r.gevrey_tau.map(|v| v.to_string()).unwrap_or_default());
        row.push(r.dealias_energy_fraction.to_string());
        row.push(r.step.to_string());
        row.push(r.max_imag.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
