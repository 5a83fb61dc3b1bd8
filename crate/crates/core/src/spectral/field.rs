use num_complex::Complex64;

use super::{Grid, SpectralError};

/// Fourier coefficients of a real, zero-mean scalar on the torus.
///
/// `coeffs[idx]` is the amplitude of `e^{i k·x}` for `k = grid.wavevector(idx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wrap raw coefficients as given, including any mean in the zero mode.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Wrap raw coefficients without touching the zero mode.
    pub(crate) fn from_raw(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Set `coeff(k)` and `coeff(-k) = conj(coeff(k))`; self-conjugate modes
    /// keep only the real part.
    pub fn set_mode(&mut self, k: &[i64], value: Complex64) -> Result<(), SpectralError> {
        let idx = self
            .grid
            .index_of(k)
            .ok_or_else(|| SpectralError::ModeOutOfRange(k.to_vec()))?;
        let m = self.grid.mirror(idx);
        if m == idx {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[idx] = value;
            self.coeffs[m] = value.conj();
        }
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        Ok(())
    }

    pub fn coeff(&self, k: &[i64]) -> Option<Complex64> {
        self.grid.index_of(k).map(|idx| self.coeffs[idx])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of `coeff(-k) = conj(coeff(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let m = self.grid.mirror(idx);
            worst = worst.max((c - self.coeffs[m].conj()).norm());
        }
        worst
    }

    /// Replace every pair by its Hermitian average.
    pub fn symmetrize(&mut self) {
        for idx in 0..self.coeffs.len() {
            let m = self.grid.mirror(idx);
            if m < idx {
                continue;
            }
            if m == idx {
                self.coeffs[idx].im = 0.0;
            } else {
                let avg = 0.5 * (self.coeffs[idx] + self.coeffs[m].conj());
                self.coeffs[idx] = avg;
                self.coeffs[m] = avg.conj();
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// `self + factor * other`.
    pub fn axpy(&mut self, factor: f64, other: &SpectralField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Velocity components `u_1..u_d`, each a [`SpectralField`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(grid: &Grid, components: Vec<SpectralField>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        Self {
            grid: grid.clone(),
            components,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &SpectralField {
        &self.components[j]
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField] {
        &mut self.components
    }
}
