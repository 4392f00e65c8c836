//! Self-contained numeric substrate.
//!
//! Everything the physical layers need and nothing more: dense complex
//! Hermitian matrices (eigendecomposition, Cholesky, PSD clamping),
//! Gauss-Legendre quadrature, the Bessel function `J0`, reproducible RNG
//! streams, correlated complex Gaussian sampling, and a grid-safeguarded
//! unimodal maximizer. Matrices are small (antenna counts, dim <= 64), so
//! all algorithms favor robustness and determinism over asymptotics.

mod bessel;
mod gaussian;
mod hermitian;
mod quadrature;
mod rng;
mod search;

pub use bessel::bessel_j0;
pub use gaussian::{sample_complex_gaussian, GaussianSampler};
pub use hermitian::{dot_conj, gram, vec_norm, CholeskyFactor, Eigh, HermitianMatrix};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use rng::RngStream;
pub use search::maximize_unimodal_1d;

/// Eigenvalues at or above `-PSD_TOLERANCE` are treated as zero when a
/// positive semidefinite matrix is required; anything below is an error.
/// Absorbs quadrature and round-off noise in correlation matrices whose
/// traces are O(1).
pub const PSD_TOLERANCE: f64 = 1e-10;
