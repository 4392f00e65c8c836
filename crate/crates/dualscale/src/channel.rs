//! Large-scale spatial and temporal channel models.
//!
//! A user at direction `theta` with single-side angular spread
//! `delta_theta` sees a one-ring channel: multipath arrives uniformly from
//! `[theta - delta_theta, theta + delta_theta]`, giving the gain-normalized
//! spatial correlation `R = integral of S(t) a(t) a(t)^H dt` with unit trace.
//! Across blocks the small-scale vector decorrelates (channel aging):
//! `h_n = rho_n h_1 + e` with `e ~ CN(0, beta (1 - rho_n^2) R)`, where
//! `rho_n` follows either a Clarke-Jakes Doppler model or a geometric decay.

use num_complex::Complex64;

use crate::numerics::{
    bessel_j0, gauss_legendre, GaussianSampler, HermitianMatrix, RngStream, PSD_TOLERANCE,
};
use crate::{Error, Result};

/// Per-user geometry: direction of arrival, angular spread, average gain.
#[derive(Debug, Clone, Copy)]
pub struct UserGeometry {
    /// Direction of arrival, radians, strictly inside (-pi/2, pi/2).
    pub theta: f64,
    /// Single-side angular spread, radians, > 0.
    pub delta_theta: f64,
    /// Average linear channel gain, > 0.
    pub beta: f64,
}

impl UserGeometry {
    /// Validated constructor.
    pub fn new(theta: f64, delta_theta: f64, beta: f64) -> Result<Self> {
        let g = Self {
            theta,
            delta_theta,
            beta,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Argument(format!(
                "direction of arrival must satisfy |theta| < pi/2 rad, got {}",
                self.theta
            )));
        }
        if !(self.delta_theta > 0.0) || !self.delta_theta.is_finite() {
            return Err(Error::Argument(format!(
                "angular spread must be positive, got {}",
                self.delta_theta
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Argument(format!(
                "channel gain must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Temporal (aging) correlation model for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalModel {
    /// Clarke-Jakes Doppler: `rho_n = J0(2 pi f_d_max_tb n)` where
    /// `f_d_max_tb` is the dimensionless maximum-Doppler x block-duration
    /// product.
    Jakes { f_d_max_tb: f64 },
    /// Geometric decay: `rho_n = rho_1^n` with `rho_1` in (0, 1].
    Exponential { rho_1: f64 },
}

impl TemporalModel {
    /// Checks the variant's parameter range.
    pub fn validate(&self) -> Result<()> {
        match *self {
            TemporalModel::Jakes { f_d_max_tb } => {
                if !(f_d_max_tb >= 0.0) || !f_d_max_tb.is_finite() {
                    return Err(Error::Argument(format!(
                        "Doppler-block product must be finite and >= 0, got {f_d_max_tb}"
                    )));
                }
            }
            TemporalModel::Exponential { rho_1 } => {
                if !(rho_1 > 0.0 && rho_1 <= 1.0) {
                    return Err(Error::Argument(format!(
                        "one-block correlation must lie in (0, 1], got {rho_1}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Gain-normalized spatial correlation matrix (unit trace, PSD).
#[derive(Debug, Clone)]
pub struct SpatialCorrelation {
    matrix: HermitianMatrix,
}

impl SpatialCorrelation {
    /// Wraps an explicit correlation matrix, enforcing unit trace (within
    /// 1e-9) and positive semidefiniteness (within the clamping tolerance).
    pub fn from_matrix(matrix: HermitianMatrix) -> Result<Self> {
        if (matrix.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "correlation trace {} is not 1",
                matrix.trace()
            )));
        }
        let min = matrix.min_eigenvalue()?;
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tolerance: PSD_TOLERANCE,
            });
        }
        Ok(Self { matrix })
    }

    /// The correlation matrix.
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// Antenna dimension.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Transmit steering vector of a half-wavelength ULA: element `l` (0-based)
/// is `exp(-i pi l sin(theta)) / sqrt(L)`; unit Euclidean norm.
pub fn steering_tx(theta: f64, l_count: usize) -> Result<Vec<Complex64>> {
    if l_count == 0 {
        return Err(Error::Argument("antenna count must be >= 1".into()));
    }
    let s = theta.sin();
    let scale = 1.0 / (l_count as f64).sqrt();
    Ok((0..l_count)
        .map(|l| Complex64::from_polar(scale, -std::f64::consts::PI * l as f64 * s))
        .collect())
}

/// Elementwise derivative of [`steering_tx`] with respect to `theta`:
/// element `l` is `(-i pi l cos(theta)) exp(-i pi l sin(theta)) / sqrt(L)`.
pub fn steering_derivative(theta: f64, l_count: usize) -> Result<Vec<Complex64>> {
    let a = steering_tx(theta, l_count)?;
    let c = theta.cos();
    Ok(a.into_iter()
        .enumerate()
        .map(|(l, al)| Complex64::new(0.0, -std::f64::consts::PI * l as f64 * c) * al)
        .collect())
}

/// Builds the one-ring spatial correlation by Gauss-Legendre quadrature of
/// `(1 / (2 delta_theta)) a(t) a(t)^H` over the user's angular support.
///
/// The result is exactly Hermitian with unit trace (within 1e-9) and PSD
/// within the clamping tolerance; a more negative eigenvalue indicates a
/// quadrature failure and is reported as an internal error.
pub fn spatial_correlation(
    geom: &UserGeometry,
    l_t: usize,
    quad_order: usize,
) -> Result<SpatialCorrelation> {
    geom.validate()?;
    if l_t == 0 {
        return Err(Error::Argument("antenna count must be >= 1".into()));
    }
    if quad_order < 8 {
        return Err(Error::Argument(format!(
            "quadrature order must be >= 8, got {quad_order}"
        )));
    }
    let lo = geom.theta - geom.delta_theta;
    let hi = geom.theta + geom.delta_theta;
    let rule = gauss_legendre(quad_order, lo, hi)?;
    // Normalize the uniform density over the support as actually realized in
    // floating point; for very small spreads (hi - lo) can deviate from
    // 2 * delta_theta by cancellation, and the unit-trace identity must hold
    // over the integrated interval.
    let density = 1.0 / (hi - lo);
    let mut acc = vec![Complex64::ZERO; l_t * l_t];
    for (&node, &w) in rule.nodes().iter().zip(rule.weights()) {
        let a = steering_tx(node, l_t)?;
        let scale = w * density;
        for i in 0..l_t {
            for j in i..l_t {
                acc[i * l_t + j] += scale * a[i] * a[j].conj();
            }
        }
    }
    let matrix = HermitianMatrix::from_upper(l_t, |i, j| acc[i * l_t + j]);
    let trace = matrix.trace();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "spatial correlation trace {trace} deviates from 1"
        )));
    }
    let min_eig = matrix.min_eigenvalue()?;
    if min_eig < -PSD_TOLERANCE {
        return Err(Error::Internal(format!(
            "spatial correlation has eigenvalue {min_eig:.3e}; quadrature failed"
        )));
    }
    Ok(SpatialCorrelation { matrix })
}

/// Temporal correlation coefficient at block offset `n` (1 at `n = 0`).
pub fn temporal_coeff(model: &TemporalModel, n: u32) -> f64 {
    match *model {
        TemporalModel::Jakes { f_d_max_tb } => {
            let x = 2.0 * std::f64::consts::PI * f_d_max_tb * n as f64;
            bessel_j0(x).expect("finite by TemporalModel invariant")
        }
        TemporalModel::Exponential { rho_1 } => rho_1.powi(n as i32),
    }
}

/// Reusable aging sampler: applies `h -> rho_n h + e` with
/// `e ~ CN(0, beta (1 - rho_n^2) R)`, amortizing the covariance square root
/// across draws.
#[derive(Debug, Clone)]
pub struct AgedChannelSampler {
    rho_n: f64,
    residual: GaussianSampler,
}

impl AgedChannelSampler {
    /// Builds the sampler for a fixed aging coefficient.
    pub fn new(rho_n: f64, spatial: &SpatialCorrelation, beta: f64) -> Result<Self> {
        if !(rho_n.abs() <= 1.0) {
            return Err(Error::Argument(format!(
                "aging coefficient must satisfy |rho_n| <= 1, got {rho_n}"
            )));
        }
        if !(beta > 0.0) {
            return Err(Error::Argument(format!(
                "channel gain must be positive, got {beta}"
            )));
        }
        let cov = spatial.matrix().scale(beta * (1.0 - rho_n * rho_n));
        Ok(Self {
            rho_n,
            residual: GaussianSampler::new(&cov)?,
        })
    }

    /// One aged draw from `h1`.
    pub fn draw(&self, h1: &[Complex64], rng: &mut RngStream) -> Result<Vec<Complex64>> {
        if h1.len() != self.residual.dim() {
            return Err(Error::Argument(format!(
                "channel vector has dimension {}, expected {}",
                h1.len(),
                self.residual.dim()
            )));
        }
        let e = self.residual.draw(rng);
        Ok(h1
            .iter()
            .zip(e)
            .map(|(&h, ei)| self.rho_n * h + ei)
            .collect())
    }
}

/// Ages a channel vector one-shot: `rho_n h1 + e` with
/// `e ~ CN(0, beta (1 - rho_n^2) R)`. For bulk draws at a fixed `rho_n`,
/// build one [`AgedChannelSampler`] instead.
pub fn age_channel(
    h1: &[Complex64],
    rho_n: f64,
    spatial: &SpatialCorrelation,
    beta: f64,
    rng: &mut RngStream,
) -> Result<Vec<Complex64>> {
    AgedChannelSampler::new(rho_n, spatial, beta)?.draw(h1, rng)
}
