//! Multi-dimensional FFTs over the grid layout.
//!
//! Normalization: `coeff(k) = N^{-1} Σ_x f(x) e^{-i k·x}`, so `e^{i k·x}` has unit
//! coefficient and the inverse is the plain sum `Σ_k coeff(k) e^{i k·x}`.

use num_complex::Complex64;
use rustfft::Fft;

use super::{Grid, SpectralError, SpectralField};

/// Reusable buffers for repeated transforms on one grid.
pub struct FftWorkspace {
    grid: Grid,
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FftWorkspace {
    pub fn new(grid: &Grid) -> Self {
        let (fwd, inv) = grid.plans();
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            grid: grid.clone(),
            lines: vec![Complex64::new(0.0, 0.0); grid.len()],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Unnormalized transform along every axis, in place.
    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let grid = self.grid.clone();
        let (fwd, inv) = grid.plans();
        let plan: &dyn Fft<f64> = if inverse { inv.as_ref() } else { fwd.as_ref() };
        let n = grid.n();
        let dim = grid.dim();
        let len = data.len();

        // Contiguous last axis: one batched call.
        plan.process_with_scratch(data, &mut self.scratch);

        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let outer = len / (n * stride);
            // Gather lines along `axis` into contiguous storage.
            let mut line = 0;
            for o in 0..outer {
                let base0 = o * n * stride;
                for inner in 0..stride {
                    let base = base0 + inner;
                    let dst = &mut self.lines[line * n..(line + 1) * n];
                    for (j, d) in dst.iter_mut().enumerate() {
                        *d = data[base + j * stride];
                    }
                    line += 1;
                }
            }
            plan.process_with_scratch(&mut self.lines, &mut self.scratch);
            let mut line = 0;
            for o in 0..outer {
                let base0 = o * n * stride;
                for inner in 0..stride {
                    let base = base0 + inner;
                    let src = &self.lines[line * n..(line + 1) * n];
                    for (j, s) in src.iter().enumerate() {
                        data[base + j * stride] = *s;
                    }
                    line += 1;
                }
            }
        }
    }

    /// Physical samples (complex) from coefficients, in place.
    pub fn inverse_in_place(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Normalized coefficients from physical samples (complex), in place.
    pub fn forward_in_place(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / data.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    /// Forward transform of a real array packed in `data` (imaginary parts
    /// zero); the result is projected onto exactly Hermitian coefficients.
    pub fn forward_real_in_place(&mut self, data: &mut [Complex64]) {
        self.forward_in_place(data);
        hermitian_part(&self.grid, data);
    }

    /// Transform two real arrays `a + i b` packed in `data`; splits the
    /// result into two Hermitian coefficient arrays.
    pub fn forward_pair_in_place(&mut self, data: &mut [Complex64], second: &mut [Complex64]) {
        self.forward_in_place(data);
        let grid = &self.grid;
        for idx in 0..data.len() {
            let m = grid.mirror(idx);
            if m < idx {
                continue;
            }
            let z = data[idx];
            let zm = data[m].conj();
            let a = 0.5 * (z + zm);
            let b = Complex64::new(0.0, -0.5) * (z - zm);
            if m == idx {
                data[idx] = Complex64::new(a.re, 0.0);
                second[idx] = Complex64::new(b.re, 0.0);
            } else {
                data[idx] = a;
                data[m] = a.conj();
                second[idx] = b;
                second[m] = b.conj();
            }
        }
    }
}

fn hermitian_part(grid: &Grid, data: &mut [Complex64]) {
    for idx in 0..data.len() {
        let m = grid.mirror(idx);
        if m < idx {
            continue;
        }
        if m == idx {
            data[idx].im = 0.0;
        } else {
            let avg = 0.5 * (data[idx] + data[m].conj());
            data[idx] = avg;
            data[m] = avg.conj();
        }
    }
}

fn check_shape(grid: &Grid, len: usize) -> Result<(), SpectralError> {
    if len != grid.len() {
        return Err(SpectralError::ShapeMismatch {
            expected: grid.len(),
            got: len,
        });
    }
    Ok(())
}

/// Coefficients of real samples laid out row-major on `grid`.
///
/// The mean is kept in the zero mode; see
/// [`project_zero_mean`](super::project_zero_mean).
pub fn forward(grid: &Grid, samples: &[f64]) -> Result<SpectralField, SpectralError> {
    check_shape(grid, samples.len())?;
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftWorkspace::new(grid).forward_real_in_place(&mut data);
    Ok(SpectralField::from_raw(grid, data))
}

/// Complex physical samples; the imaginary part measures loss of realness.
pub fn inverse_complex(field: &SpectralField) -> Vec<Complex64> {
    let mut data = field.coeffs().to_vec();
    FftWorkspace::new(field.grid()).inverse_in_place(&mut data);
    data
}

/// Real physical samples (imaginary residue discarded).
pub fn inverse(field: &SpectralField) -> Vec<f64> {
    inverse_complex(field).into_iter().map(|z| z.re).collect()
}

/// Two real inverse transforms for the price of one complex transform.
/// Both inputs must be Hermitian.
pub fn inverse_pair(a: &SpectralField, b: &SpectralField) -> (Vec<f64>, Vec<f64>) {
    let mut data: Vec<Complex64> = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x + Complex64::new(-y.im, y.re))
        .collect();
    FftWorkspace::new(a.grid()).inverse_in_place(&mut data);
    data.into_iter().map(|z| (z.re, z.im)).unzip()
}
