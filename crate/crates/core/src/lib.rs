pub mod diagnostics;
pub mod evolution;
pub mod fit;
pub mod harness;
pub mod laws;
pub mod spectral;
