use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LawError;
use crate::spectral::{SpectralField, VectorField, Wavevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// Magnetogeostrophic, 3D.
    Mg,
    /// Porous media with Brinkman correction, 2D.
    Ipmb,
    /// Surface quasi-geostrophic, 2D.
    Sqg,
}

impl LawKind {
    pub const ALL: [LawKind; 3] = [LawKind::Mg, LawKind::Ipmb, LawKind::Sqg];

    pub fn dim(self) -> usize {
        match self {
            LawKind::Mg => 3,
            LawKind::Ipmb | LawKind::Sqg => 2,
        }
    }

    pub fn parity(self) -> Parity {
        match self {
            LawKind::Mg | LawKind::Ipmb => Parity::Even,
            LawKind::Sqg => Parity::Odd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Mg => "mg",
            LawKind::Ipmb => "ipmb",
            LawKind::Sqg => "sqg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mg" => Some(LawKind::Mg),
            "ipmb" => Some(LawKind::Ipmb),
            "sqg" => Some(LawKind::Sqg),
            _ => None,
        }
    }
}

impl std::fmt::Display for LawKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Symmetry of the real symbol vector under `k -> -k`.
///
/// Even symbols act on `θ̂` directly. Odd symbols act as `i m(k)` so that a
/// real scalar gives a real velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Magnetogeostrophic symbol.
///
/// `D(k) = |k|² k₃² + (k₂² + ν|k|⁴)²` vanishes for `ν = 0, k₂ = k₃ = 0`,
/// which is reported as [`LawError::SingularSymbol`].
pub fn mg_symbol(nu: f64, k: [i64; 3]) -> Result<[f64; 3], LawError> {
    let [k1, k2, k3] = k;
    let ksq = k1 * k1 + k2 * k2 + k3 * k3;
    if ksq == 0 {
        return Err(LawError::ZeroWavevector);
    }
    if nu == 0.0 {
        // Everything is an integer; form it exactly.
        let p = (k2 * k2) as i128;
        let (k1, k2, k3, ksq) = (k1 as i128, k2 as i128, k3 as i128, ksq as i128);
        let d = ksq * k3 * k3 + p * p;
        if d == 0 {
            return Err(LawError::SingularSymbol(k.to_vec()));
        }
        let n1 = k2 * k3 * ksq - k1 * k3 * p;
        let n2 = -k1 * k3 * ksq - k2 * k3 * p;
        let n3 = (k1 * k1 + k2 * k2) * p;
        let d = d as f64;
        return Ok([n1 as f64 / d, n2 as f64 / d, n3 as f64 / d]);
    }
    let k4 = (ksq * ksq) as f64;
    let p = (k2 * k2) as f64 + nu * k4;
    let (k1f, k2f, k3f, ksqf) = (k1 as f64, k2 as f64, k3 as f64, ksq as f64);
    let d = ksqf * (k3 * k3) as f64 + p * p;
    let n1 = (k2 * k3 * ksq) as f64 - k1f * k3f * p;
    let n2 = -((k1 * k3 * ksq) as f64) - k2f * k3f * p;
    let n3 = ((k1 * k1 + k2 * k2) as f64) * p;
    Ok([n1 / d, n2 / d, n3 / d])
}

/// Porous media Brinkman symbol `(1+ν|k|²)^{-1} (k₁k₂, -k₁²)/|k|²`.
pub fn ipmb_symbol(nu: f64, k: [i64; 2]) -> Result<[f64; 2], LawError> {
    let [k1, k2] = k;
    let ksq = k1 * k1 + k2 * k2;
    if ksq == 0 {
        return Err(LawError::ZeroWavevector);
    }
    let ksqf = ksq as f64;
    let pre = 1.0 / (1.0 + nu * ksqf);
    Ok([
        pre * ((k1 * k2) as f64 / ksqf),
        pre * (-((k1 * k1) as f64) / ksqf),
    ])
}

/// Modified SQG symbol `(1+ν|k|²)^{-1} (k₂, -k₁)/|k|`.
pub fn sqg_symbol(nu: f64, k: [i64; 2]) -> Result<[f64; 2], LawError> {
    let [k1, k2] = k;
    let ksq = k1 * k1 + k2 * k2;
    if ksq == 0 {
        return Err(LawError::ZeroWavevector);
    }
    let ksqf = ksq as f64;
    let pre = 1.0 / (1.0 + nu * ksqf);
    let norm = ksqf.sqrt();
    Ok([pre * (k2 as f64 / norm), pre * (-(k1 as f64) / norm)])
}

/// One of the three constitutive laws at a fixed `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstitutiveLaw {
    pub kind: LawKind,
    pub nu: f64,
}

impl ConstitutiveLaw {
    pub fn new(kind: LawKind, nu: f64) -> Result<Self, LawError> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(LawError::NegativeViscosity(nu));
        }
        Ok(Self { kind, nu })
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn parity(&self) -> Parity {
        self.kind.parity()
    }

    /// Real symbol vector (trailing component zero in 2D).
    pub fn symbol(&self, k: &Wavevector) -> Result<[f64; 3], LawError> {
        match self.kind {
            LawKind::Mg => mg_symbol(self.nu, *k),
            LawKind::Ipmb => ipmb_symbol(self.nu, [k[0], k[1]]).map(|m| [m[0], m[1], 0.0]),
            LawKind::Sqg => sqg_symbol(self.nu, [k[0], k[1]]).map(|m| [m[0], m[1], 0.0]),
        }
    }

    /// Symbol with the zero mode and the MG singular set mapped to the zero
    /// vector. The flag is true on the singular set.
    pub fn symbol_or_zero(&self, k: &Wavevector) -> ([f64; 3], bool) {
        match self.symbol(k) {
            Ok(m) => (m, false),
            Err(LawError::SingularSymbol(_)) => ([0.0; 3], true),
            Err(_) => ([0.0; 3], false),
        }
    }

    /// Complex multiplier applied to `θ̂(k)` for component `j`.
    pub fn multiplier(&self, k: &Wavevector) -> [Complex64; 3] {
        let (m, _) = self.symbol_or_zero(k);
        match self.parity() {
            Parity::Even => m.map(|v| Complex64::new(v, 0.0)),
            Parity::Odd => m.map(|v| Complex64::new(0.0, v)),
        }
    }

    pub fn label(&self) -> String {
        format!("{}(nu={})", self.kind, self.nu)
    }
}

/// `û_j(k) = m_j(k) θ̂(k)` mode by mode (with the factor `i` for odd laws).
///
/// Nyquist modes and the zero mode carry no velocity.
pub fn compute_velocity(law: &ConstitutiveLaw, theta: &SpectralField) -> Result<VectorField, LawError> {
    let grid = theta.grid();
    if grid.dim() != law.dim() {
        return Err(LawError::DimensionMismatch {
            law: law.dim(),
            grid: grid.dim(),
        });
    }
    let dim = grid.dim();
    let mut comps: Vec<SpectralField> = (0..dim).map(|_| SpectralField::zeros(grid)).collect();
    for (idx, c) in theta.coeffs().iter().enumerate() {
        if idx == 0 || grid.is_nyquist(idx) || (c.re == 0.0 && c.im == 0.0) {
            continue;
        }
        let mult = law.multiplier(&grid.wavevector(idx));
        for (j, comp) in comps.iter_mut().enumerate() {
            comp.coeffs_mut()[idx] = mult[j] * c;
        }
    }
    Ok(VectorField::from_components(grid, comps))
}
