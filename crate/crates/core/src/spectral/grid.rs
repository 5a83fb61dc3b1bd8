use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::SpectralError;

/// Integer wavevector. Unused trailing components are zero in 2D.
pub type Wavevector = [i64; 3];

/// Uniform grid on `[0, 2π]^d` with `n` modes per dimension.
///
/// Storage is the full complex layout of size `n^d`, row-major with the last
/// axis contiguous. Index `i` along an axis carries wavenumber `i` for
/// `i <= n/2` and `i - n` otherwise, so components lie in `[-n/2+1, n/2]`.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    wavevectors: Vec<Wavevector>,
    ksq: Vec<i64>,
    mirror: Vec<usize>,
    nyquist: Vec<bool>,
    dealiased: Vec<bool>,
    plan_forward: Arc<dyn Fft<f64>>,
    plan_inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self, SpectralError> {
        if dim != 2 && dim != 3 {
            return Err(SpectralError::UnsupportedDimension(dim));
        }
        if n % 2 != 0 {
            return Err(SpectralError::OddResolution(n));
        }
        if n < 8 {
            return Err(SpectralError::ResolutionTooSmall(n));
        }
        let len = n.pow(dim as u32);
        let half = (n / 2) as i64;
        let cutoff = (n / 3) as i64;
        let wavenumber = |i: usize| -> i64 {
            let i = i as i64;
            if i <= half {
                i
            } else {
                i - n as i64
            }
        };

        let mut wavevectors = Vec::with_capacity(len);
        let mut mirror = Vec::with_capacity(len);
        for idx in 0..len {
            let mut k = [0i64; 3];
            let mut rem = idx;
            let mut mirrored = 0usize;
            for axis in (0..dim).rev() {
                let i = rem % n;
                rem /= n;
                k[axis] = wavenumber(i);
                mirrored += ((n - i) % n) * n.pow((dim - 1 - axis) as u32);
            }
            wavevectors.push(k);
            mirror.push(mirrored);
        }
        let ksq = wavevectors
            .iter()
            .map(|k| k.iter().map(|c| c * c).sum())
            .collect();
        let nyquist = wavevectors
            .iter()
            .map(|k| k.iter().any(|&c| c == half))
            .collect();
        let dealiased = wavevectors
            .iter()
            .map(|k| k.iter().all(|&c| c.abs() <= cutoff))
            .collect();

        let mut planner = FftPlanner::new();
        let plan_forward = planner.plan_fft_forward(n);
        let plan_inverse = planner.plan_fft_inverse(n);

        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                wavevectors,
                ksq,
                mirror,
                nyquist,
                dealiased,
                plan_forward,
                plan_inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Modes per dimension.
    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Total number of stored (logical) modes, `n^d`.
    pub fn len(&self) -> usize {
        self.inner.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn wavevector(&self, idx: usize) -> Wavevector {
        self.inner.wavevectors[idx]
    }

    pub fn wavevectors(&self) -> &[Wavevector] {
        &self.inner.wavevectors
    }

    /// `|k|^2` in exact integer arithmetic.
    pub fn ksq(&self, idx: usize) -> i64 {
        self.inner.ksq[idx]
    }

    pub fn ksq_table(&self) -> &[i64] {
        &self.inner.ksq
    }

    /// Storage index of `-k`.
    pub fn mirror(&self, idx: usize) -> usize {
        self.inner.mirror[idx]
    }

    /// True when some component equals `n/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.inner.nyquist[idx]
    }

    /// True when every component satisfies `|k_j| <= n/3`.
    pub fn is_retained(&self, idx: usize) -> bool {
        self.inner.dealiased[idx]
    }

    /// Largest component magnitude kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.inner.n / 3) as i64
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let n = self.inner.n as i64;
        let half = n / 2;
        if k.len() != self.inner.dim {
            return None;
        }
        let mut idx = 0usize;
        for &c in k {
            if c <= -half || c > half {
                return None;
            }
            idx = idx * self.inner.n + c.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Physical sample coordinate of flat sample index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.inner.n;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut x = [0.0; 3];
        let mut rem = idx;
        for axis in (0..self.inner.dim).rev() {
            x[axis] = (rem % n) as f64 * h;
            rem /= n;
        }
        x
    }

    pub(crate) fn plans(&self) -> (&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) {
        (&self.inner.plan_forward, &self.inner.plan_inverse)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim && self.inner.n == other.inner.n)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .finish()
    }
}

/// Build a grid; `make_grid(2, 8)` has wavenumber components in `-3..=4`.
pub fn make_grid(dim: usize, n: usize) -> Result<Grid, SpectralError> {
    Grid::new(dim, n)
}
