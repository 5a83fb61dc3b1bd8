//! Binary checkpoints: little-endian `f64` payload behind a fixed header.
//!
//! Layout: `"ASLB1"`, version `u32`, `d u32`, `n u32`, `t f64`, law name
//! (`u8` length + ASCII), `ν κ γ f64`, `step u64`, `dt f64`, energy budget
//! (`3 × f64`), multistep flag `u8` (+ `2 × f64`), coefficient count `u64`,
//! then `(re, im)` pairs for θ̂ and, when flagged, the stored explicit term.

use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::evolution::{EnergyBudget, MultistepHistory, StepState};
use crate::laws::LawKind;
use crate::spectral::{make_grid, SpectralField};

pub const MAGIC: &[u8; 5] = b"ASLB1";
pub const VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckpointError {
    #[error("BadMagic: not a checkpoint file")]
    BadMagic,
    #[error("TruncatedPayload: needed {needed} bytes, found {available}")]
    TruncatedPayload { needed: usize, available: usize },
    #[error("VersionMismatch: file version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Everything needed to continue a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub law: LawKind,
    pub nu: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub dt: f64,
    pub state: StepState,
}

pub fn encode(ck: &Checkpoint) -> Vec<u8> {
    let grid = ck.state.theta.grid();
    let mut out = Vec::with_capacity(128 + grid.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&ck.state.t.to_le_bytes());
    let name = ck.law.name().as_bytes();
    out.push(name.len() as u8);
    out.extend_from_slice(name);
    for v in [ck.nu, ck.kappa, ck.gamma] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&ck.state.step.to_le_bytes());
    let b = ck.state.budget;
    for v in [ck.dt, b.initial_energy, b.dissipation, b.forcing] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    match &ck.state.history {
        Some(h) => {
            out.push(1);
            out.extend_from_slice(&h.budget_rate.0.to_le_bytes());
            out.extend_from_slice(&h.budget_rate.1.to_le_bytes());
        }
        None => out.push(0),
    }
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    let mut push_coeffs = |c: &[Complex64]| {
        for z in c {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    };
    push_coeffs(ck.state.theta.coeffs());
    if let Some(h) = &ck.state.history {
        push_coeffs(h.rhs.coeffs());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(CheckpointError::TruncatedPayload {
                needed: end,
                available: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn coeffs(&mut self, count: usize) -> Result<Vec<Complex64>, CheckpointError> {
        let raw = self.take(count * 16)?;
        Ok(raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    let d = r.u32()? as usize;
    let n = r.u32()? as usize;
    let t = r.f64()?;
    let len = r.u8()? as usize;
    let name = std::str::from_utf8(r.take(len)?).map_err(|_| CheckpointError::Corrupt("law name".into()))?;
    let law = LawKind::parse(name).ok_or_else(|| CheckpointError::Corrupt(format!("unknown law {name:?}")))?;
    let nu = r.f64()?;
    let kappa = r.f64()?;
    let gamma = r.f64()?;
    let step = r.u64()?;
    let dt = r.f64()?;
    let budget = EnergyBudget {
        initial_energy: r.f64()?,
        dissipation: r.f64()?,
        forcing: r.f64()?,
    };
    let has_history = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(CheckpointError::Corrupt(format!("multistep flag {other}"))),
    };
    let rates = if has_history {
        Some((r.f64()?, r.f64()?))
    } else {
        None
    };
    let grid = make_grid(d, n).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    let count = r.u64()? as usize;
    if count != grid.len() {
        return Err(CheckpointError::Corrupt(format!(
            "{count} coefficients for a grid of {}",
            grid.len()
        )));
    }
    let theta = SpectralField::from_coeffs(&grid, r.coeffs(count)?).expect("length checked");
    let history = match rates {
        Some(budget_rate) => Some(MultistepHistory {
            rhs: SpectralField::from_coeffs(&grid, r.coeffs(count)?).expect("length checked"),
            budget_rate,
        }),
        None => None,
    };
    if r.pos != bytes.len() {
        return Err(CheckpointError::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(Checkpoint {
        law,
        nu,
        kappa,
        gamma,
        dt,
        state: StepState {
            t,
            step,
            theta,
            budget,
            history,
        },
    })
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, encode(ck)).map_err(|e| CheckpointError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = std::fs::read(path).map_err(|e| CheckpointError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{FieldSpec, Integrator, Simulation, SolverConfig};
    use proptest::prelude::*;

    fn mid_run(integrator: Integrator, seed: u64) -> Checkpoint {
        let mut c = SolverConfig::new(LawKind::Sqg, 0.1, 0.5, 1.0, 16, 0.01, 1.0);
        c.integrator = integrator;
        c.seed = seed;
        c.forcing = FieldSpec::PowerLaw {
            slope: 2.0,
            l2: 0.1,
            seed: None,
        };
        let mut sim = Simulation::new(&c).unwrap();
        sim.advance_to(7, &mut Vec::new()).unwrap();
        Checkpoint {
            law: c.law,
            nu: c.nu,
            kappa: c.kappa,
            gamma: c.gamma,
            dt: sim.dt(),
            state: sim.into_state(),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for integrator in [Integrator::Rk4If, Integrator::Ab2If] {
            let ck = mid_run(integrator, 3);
            let bytes = encode(&ck);
            let back = decode(&bytes).unwrap();
            assert_eq!(back, ck);
            assert_eq!(encode(&back), bytes);
        }
    }

    #[test]
    fn header_errors() {
        let bytes = encode(&mid_run(Integrator::Rk4If, 1));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad), Err(CheckpointError::BadMagic));
        let mut old = bytes.clone();
        old[5..9].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(decode(&old), Err(CheckpointError::VersionMismatch { found: 7, .. })));
        assert!(matches!(
            decode(&bytes[..bytes.len() - 3]),
            Err(CheckpointError::TruncatedPayload { .. })
        ));
        assert!(matches!(decode(&bytes[..20]), Err(CheckpointError::TruncatedPayload { .. })));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.aslb");
        let ck = mid_run(Integrator::Ab2If, 9);
        save_checkpoint(&ck, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ck);
        assert!(matches!(
            load_checkpoint(&dir.path().join("missing")),
            Err(CheckpointError::Io { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn random_states_round_trip(seed in 0u64..1000, cut in 0usize..4000) {
            let bytes = encode(&mid_run(Integrator::Rk4If, seed));
            prop_assert_eq!(encode(&decode(&bytes).unwrap()), bytes.clone());
            let cut = cut.min(bytes.len() - 1);
            prop_assert!(decode(&bytes[..cut]).is_err());
        }
    }
}
