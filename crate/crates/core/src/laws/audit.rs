//! Finite-shell numeric evidence for the structural conditions on a symbol
//! family. These are measurements over `0 < |k| <= K`, not proofs.

use serde::{Deserialize, Serialize};

use super::{ConstitutiveLaw, LawError, LawKind};
use crate::fit::{linear_fit, LinearFit};
use crate::spectral::Wavevector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    /// `k · m(k) = 0` (divergence-free velocity).
    A1,
    /// `|m(k)|/|k|` bounded uniformly in ν.
    A2,
    /// `|m(k)|` bounded uniformly in ν.
    #[serde(rename = "A2*")]
    A2Star,
    /// `|k|²|m^ν(k)|` bounded for each ν > 0.
    A3,
    /// `m^ν -> m^0` as ν -> 0.
    A5,
}

impl ConditionId {
    pub const ALL: [ConditionId; 5] = [
        ConditionId::A1,
        ConditionId::A2,
        ConditionId::A2Star,
        ConditionId::A3,
        ConditionId::A5,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Some(Self::A1),
            "A2" => Some(Self::A2),
            "A2*" | "A2STAR" => Some(Self::A2Star),
            "A3" => Some(Self::A3),
            "A5" => Some(Self::A5),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::A1 => "A1",
            Self::A2 => "A2",
            Self::A2Star => "A2*",
            Self::A3 => "A3",
            Self::A5 => "A5",
        }
    }
}

/// Thresholds for the audit verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditSettings {
    /// A1 passes when `sup |k·m| <= a1_threshold`.
    pub a1_threshold: f64,
    /// Bounded-quantity audits pass when, for every audited ν, the sup over
    /// shells `K/2+1..=K` is at most `(1 + plateau_tolerance)` times the sup
    /// over `1..=K/2`.
    pub plateau_tolerance: f64,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self {
            a1_threshold: 1e-12,
            plateau_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSup {
    pub radius: u32,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuSup {
    pub nu: f64,
    pub sup: f64,
}

/// Log-log fit of `|m^ν(k) - m^0(k)|` against ν at one fixed wavevector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedModeRate {
    pub k: Vec<i64>,
    pub differences: Vec<NuSup>,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionAuditReport {
    pub condition: ConditionId,
    pub law: LawKind,
    pub nu_values: Vec<f64>,
    #[serde(rename = "K")]
    pub k_max: u32,
    pub measured_sup: f64,
    pub pass: bool,
    pub shells: Vec<ShellSup>,
    pub per_nu: Vec<NuSup>,
    pub singular_modes_excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_mode_rate: Option<FixedModeRate>,
    pub notes: Vec<String>,
}

/// Integer wavevectors with `0 < |k|² <= K²` in the law's dimension, in a
/// fixed lexicographic order.
pub fn shell_wavevectors(dim: usize, k_max: u32) -> Vec<Wavevector> {
    let k = k_max as i64;
    let mut out = Vec::new();
    let third = if dim == 3 { k } else { 0 };
    for a in -k..=k {
        for b in -k..=k {
            for c in -third..=third {
                let sq = a * a + b * b + c * c;
                if sq > 0 && sq <= k * k {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Shell index `ceil(|k|)`, computed exactly from `|k|²`.
pub fn shell_of(ksq: i64) -> u32 {
    let mut r = (ksq as f64).sqrt() as i64;
    while r * r < ksq {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= ksq {
        r -= 1;
    }
    r as u32
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Audit one condition for a law family over the given ν values.
pub fn audit_condition(
    kind: LawKind,
    condition: ConditionId,
    k_max: u32,
    nu_values: &[f64],
    settings: &AuditSettings,
) -> Result<ConditionAuditReport, LawError> {
    if k_max < 8 {
        return Err(LawError::AuditCutoffTooSmall(k_max));
    }
    if nu_values.is_empty() {
        return Err(LawError::EmptyNuList);
    }
    for &nu in nu_values {
        ConstitutiveLaw::new(kind, nu)?;
    }
    let modes = shell_wavevectors(kind.dim(), k_max);
    let mut shell_sup = vec![0.0f64; k_max as usize + 1];
    let mut per_nu = Vec::new();
    let mut plateau_ok = true;
    let mut plateau_notes = Vec::new();
    let mut singular = 0usize;
    let mut notes = vec!["A4 (L-infinity to BMO boundedness) not audited".to_string()];

    let audited_nus: Vec<f64> = match condition {
        ConditionId::A3 | ConditionId::A5 => {
            let pos: Vec<f64> = nu_values.iter().copied().filter(|&v| v > 0.0).collect();
            if pos.len() < nu_values.len() {
                notes.push(format!(
                    "{} is stated for nu > 0; nu = 0 entries skipped",
                    condition.name()
                ));
            }
            if pos.is_empty() {
                return Err(LawError::EmptyNuList);
            }
            pos
        }
        _ => nu_values.to_vec(),
    };

    let reference = ConstitutiveLaw { kind, nu: 0.0 };
    for &nu in &audited_nus {
        let law = ConstitutiveLaw { kind, nu };
        let mut sup_nu = 0.0f64;
        let mut own_shells = vec![0.0f64; k_max as usize + 1];
        for k in &modes {
            let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let (m, is_singular) = law.symbol_or_zero(k);
            if is_singular {
                singular += 1;
                continue;
            }
            let knorm = (ksq as f64).sqrt();
            let value = match condition {
                ConditionId::A1 => {
                    (k[0] as f64 * m[0] + k[1] as f64 * m[1] + k[2] as f64 * m[2]).abs()
                }
                ConditionId::A2 => norm3(&m) / knorm,
                ConditionId::A2Star => norm3(&m),
                ConditionId::A3 => ksq as f64 * norm3(&m),
                ConditionId::A5 => {
                    let (m0, ref_singular) = reference.symbol_or_zero(k);
                    if ref_singular {
                        singular += 1;
                        continue;
                    }
                    norm3(&[m[0] - m0[0], m[1] - m0[1], m[2] - m0[2]])
                }
            };
            sup_nu = sup_nu.max(value);
            let shell = shell_of(ksq) as usize;
            shell_sup[shell] = shell_sup[shell].max(value);
            own_shells[shell] = own_shells[shell].max(value);
        }
        let half = (k_max / 2) as usize;
        let lower = own_shells[1..=half].iter().fold(0.0f64, |m, &v| m.max(v));
        let upper = own_shells[half + 1..].iter().fold(0.0f64, |m, &v| m.max(v));
        plateau_ok &= sup_nu.is_finite() && upper <= lower * (1.0 + settings.plateau_tolerance);
        plateau_notes.push(format!("plateau nu = {nu}: sup(1..K/2) = {lower:e}, sup(K/2..K) = {upper:e}"));
        per_nu.push(NuSup { nu, sup: sup_nu });
    }

    if singular > 0 {
        notes.push(format!(
            "{singular} singular modes (nu = 0, k2 = k3 = 0) excluded; symbol defined as 0 there"
        ));
    }

    let measured_sup = per_nu.iter().fold(0.0f64, |m, v| m.max(v.sup));
    let shells: Vec<ShellSup> = (1..=k_max)
        .map(|r| ShellSup {
            radius: r,
            sup: shell_sup[r as usize],
        })
        .collect();

    let mut fixed_mode_rate = None;
    let pass = match condition {
        ConditionId::A1 => measured_sup <= settings.a1_threshold,
        ConditionId::A2 | ConditionId::A2Star | ConditionId::A3 => {
            notes.extend(plateau_notes);
            plateau_ok
        }
        ConditionId::A5 => {
            let rate = fixed_mode_convergence(kind, &audited_nus);
            let diffs: Vec<f64> = rate.differences.iter().map(|d| d.sup).collect();
            let mut order: Vec<usize> = (0..diffs.len()).collect();
            order.sort_by(|&a, &b| audited_nus[a].total_cmp(&audited_nus[b]));
            let monotone = order.windows(2).all(|w| diffs[w[0]] <= diffs[w[1]]);
            let ok = monotone && (rate.differences.len() < 2 || rate.slope > 0.0);
            fixed_mode_rate = Some(rate);
            ok
        }
    };

    Ok(ConditionAuditReport {
        condition,
        law: kind,
        nu_values: nu_values.to_vec(),
        k_max,
        measured_sup,
        pass,
        shells,
        per_nu,
        singular_modes_excluded: singular,
        fixed_mode_rate,
        notes,
    })
}

/// The wavevector `(1, 1[, 1])` used for fixed-mode convergence fits.
pub fn fixed_probe(kind: LawKind) -> Wavevector {
    if kind.dim() == 3 {
        [1, 1, 1]
    } else {
        [1, 1, 0]
    }
}

/// `|m^ν(k) - m^0(k)|` at the probe wavevector for each ν, with a log-log
/// slope when at least two positive ν are given.
pub fn fixed_mode_convergence(kind: LawKind, nus: &[f64]) -> FixedModeRate {
    let k = fixed_probe(kind);
    let m0 = ConstitutiveLaw { kind, nu: 0.0 }.symbol_or_zero(&k).0;
    let differences: Vec<NuSup> = nus
        .iter()
        .map(|&nu| {
            let m = ConstitutiveLaw { kind, nu }.symbol_or_zero(&k).0;
            NuSup {
                nu,
                sup: norm3(&[m[0] - m0[0], m[1] - m0[1], m[2] - m0[2]]),
            }
        })
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = differences
        .iter()
        .filter(|d| d.nu > 0.0 && d.sup > 0.0)
        .map(|d| (d.nu.ln(), d.sup.ln()))
        .unzip();
    let fit: Option<LinearFit> = linear_fit(&lx, &ly);
    FixedModeRate {
        k: k[..kind.dim()].to_vec(),
        differences,
        slope: fit.map_or(f64::NAN, |f| f.slope),
        r_squared: fit.map_or(f64::NAN, |f| f.r_squared),
    }
}
