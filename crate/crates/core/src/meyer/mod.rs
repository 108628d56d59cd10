//! Meyer wavelets on the torus: windows, atoms, analysis/synthesis and time-adapted index sets.

mod basis;
mod coefficients;
mod index;
mod window;

pub use basis::{relative_leakage, MeyerBasis, WaveletAtom};
pub use coefficients::{band_count, eps_bits, WaveletCoefficients};
pub use index::{time_level, ParameterIndexSet};
pub use window::{ramp_by_name, MeyerWindow, PolynomialRamp, QuadraticRamp, Ramp, SmoothstepRamp};

use crate::error::Result;
use crate::spectral::SpectralField;

/// Coefficients over the index set matched to time `t`.
pub fn analyze_parameter(basis: &MeyerBasis, f: &SpectralField, t: f64) -> Result<WaveletCoefficients> {
    let index = ParameterIndexSet::new(t, basis.max_level())?;
    analyze_index(basis, f, &index)
}

pub fn analyze_index(
    basis: &MeyerBasis,
    f: &SpectralField,
    index: &ParameterIndexSet,
) -> Result<WaveletCoefficients> {
    basis.analyze(f, index.j_t(), basis.max_level())
}
