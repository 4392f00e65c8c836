//! Correlated circularly-symmetric complex Gaussian sampling.
//!
//! Draws `CN(0, cov)` vectors through the eigendecomposition square root
//! `S = U sqrt(clamp(Lambda))`: each sample is `S z` with `z` a vector of
//! unit complex normals. Eigenvalues in `[-PSD_TOLERANCE, 0)` are clamped to
//! zero (quadrature round-off); anything lower is a hard error.

use num_complex::Complex64;

use super::hermitian::HermitianMatrix;
use super::rng::RngStream;
use super::PSD_TOLERANCE;
use crate::Result;

/// Reusable sampler for `CN(0, cov)` with a precomputed square-root factor.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    dim: usize,
    /// Row-major `dim x dim` factor `S` with `S S^H = cov` (post-clamping).
    factor: Vec<Complex64>,
}

impl GaussianSampler {
    /// Builds the sampler; errors if `cov` has an eigenvalue below
    /// `-PSD_TOLERANCE`.
    pub fn new(cov: &HermitianMatrix) -> Result<Self> {
        let eig = cov.eigh()?;
        let factor = eig.sqrt_factor(PSD_TOLERANCE)?;
        Ok(Self {
            dim: cov.dim(),
            factor,
        })
    }

    /// Sample dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One draw.
    pub fn draw(&self, rng: &mut RngStream) -> Vec<Complex64> {
        let n = self.dim;
        let z: Vec<Complex64> = (0..n).map(|_| rng.complex_unit_normal()).collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.factor[i * n + k] * z[k]).sum())
            .collect()
    }
}

/// Draws `count` independent `CN(0, cov)` vectors.
pub fn sample_complex_gaussian(
    cov: &HermitianMatrix,
    rng: &mut RngStream,
    count: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let sampler = GaussianSampler::new(cov)?;
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}
