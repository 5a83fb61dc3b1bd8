//! Grids, transforms, and spectral norms on the periodic torus `[0, 2π]^d`.

mod fft;
mod field;
mod grid;
mod ops;
mod sum;

pub use fft::{forward, inverse, inverse_complex, inverse_pair, FftWorkspace};
pub use field::{SpectralField, VectorField};
pub use grid::{make_grid, Grid, Wavevector};
pub use ops::{
    dealias, dealias_in_place, derivative, fractional_laplacian, gevrey_norm, inner_product,
    project_zero_mean, sobolev_norm, sobolev_norm_sq, symbol_power,
};
pub use sum::CompensatedSum;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("resolution {0} is odd; n must be even")]
    OddResolution(usize),
    #[error("resolution {0} is below the minimum of 8")]
    ResolutionTooSmall(usize),
    #[error("dimension {0} is unsupported; expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("sample array has {got} entries, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("gamma = {0} outside (0,2]")]
    GammaOutOfRange(f64),
    #[error("wavevector {0:?} is not stored on this grid")]
    ModeOutOfRange(Vec<i64>),
    #[error("norm overflows f64")]
    Overflow,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
