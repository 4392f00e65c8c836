//! Small-scale MMSE channel estimation under imperfect large-scale knowledge.
//!
//! Pilots observed over one update give `y = M_m sqrt(P_m) h + z`; the MMSE
//! estimate is a linear filter built from the *effective* correlation
//! `R_hat` (the sensing-degraded prior), with pilot SNR
//! `gamma_e = M_m P_m / sigma_m^2`. The estimate `h_tilde` and the error
//! `h - h_tilde` are uncorrelated, splitting the prior exactly:
//! `C_h + C_e = R_hat`.

use num_complex::Complex64;

use crate::numerics::{HermitianMatrix, PSD_TOLERANCE};
use crate::{Error, Result};

/// Pilot signalling parameters of one small-scale update.
#[derive(Debug, Clone, Copy)]
pub struct PilotConfig {
    /// Pilot symbols per update.
    pub m_m: u32,
    /// Pilot power (linear).
    pub p_m: f64,
    /// Estimation noise variance (linear).
    pub sigma_m2: f64,
    /// Pilot SNR `M_m * P_m / sigma_m2`.
    pub gamma_e: f64,
}

impl PilotConfig {
    /// Builds the config, deriving the pilot SNR from its factors.
    pub fn new(m_m: u32, p_m: f64, sigma_m2: f64) -> Result<Self> {
        let cfg = Self {
            m_m,
            p_m,
            sigma_m2,
            gamma_e: m_m as f64 * p_m / sigma_m2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks positivity and that `gamma_e` is consistent with its factors.
    pub fn validate(&self) -> Result<()> {
        if self.m_m == 0 {
            return Err(Error::Argument("pilot symbol count must be >= 1".into()));
        }
        if !(self.p_m > 0.0) || !self.p_m.is_finite() {
            return Err(Error::Argument(format!(
                "pilot power must be positive, got {}",
                self.p_m
            )));
        }
        if !(self.sigma_m2 > 0.0) || !self.sigma_m2.is_finite() {
            return Err(Error::Argument(format!(
                "estimation noise variance must be positive, got {}",
                self.sigma_m2
            )));
        }
        let derived = self.m_m as f64 * self.p_m / self.sigma_m2;
        if !(self.gamma_e > 0.0) || (self.gamma_e - derived).abs() > 1e-12 * derived.max(1.0) {
            return Err(Error::Argument(format!(
                "pilot SNR {} inconsistent with M_m*P_m/sigma_m2 = {derived}",
                self.gamma_e
            )));
        }
        Ok(())
    }
}

/// Second-order statistics of the MMSE estimator for one user.
#[derive(Debug, Clone)]
pub struct EstimatorStats {
    /// Covariance of the estimate.
    pub c_h: HermitianMatrix,
    /// Covariance of the estimation error; `c_h + c_e = R_hat`.
    pub c_e: HermitianMatrix,
    /// The (Hermitian) filter `R_hat (R_hat + I/gamma_e)^{-1}` applied to
    /// the scaled pilot observation.
    pub filter: HermitianMatrix,
}

impl EstimatorStats {
    /// Applies the MMSE filter to a raw pilot observation:
    /// `h_tilde = filter * y / (M_m sqrt(P_m))`.
    pub fn estimate(&self, y: &[Complex64], pilot: &PilotConfig) -> Result<Vec<Complex64>> {
        pilot.validate()?;
        if y.len() != self.filter.dim() {
            return Err(Error::Argument(format!(
                "observation has dimension {}, filter expects {}",
                y.len(),
                self.filter.dim()
            )));
        }
        let scale = 1.0 / (pilot.m_m as f64 * pilot.p_m.sqrt());
        Ok(self
            .filter
            .matvec(y)
            .into_iter()
            .map(|z| z * scale)
            .collect())
    }
}

/// Validates `gamma_e` and eigendecomposes a PSD `R_hat`, zeroing the
/// round-off-negative eigenvalues inside the tolerance band so every
/// spectral function below stays well defined for any `gamma_e > 0`.
fn psd_eigenvalues(r_hat: &HermitianMatrix, gamma_e: f64) -> Result<crate::numerics::Eigh> {
    if !(gamma_e > 0.0) || !gamma_e.is_finite() {
        return Err(Error::Argument(format!(
            "pilot SNR must be positive and finite, got {gamma_e}"
        )));
    }
    let eig = r_hat.eigh()?;
    let min = eig.values()[0];
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            tolerance: PSD_TOLERANCE,
        });
    }
    Ok(eig)
}

/// MMSE estimator statistics for prior `R_hat` and pilot SNR `gamma_e`.
///
/// With `D = R_hat + I/gamma_e`: `filter = R_hat D^{-1}`,
/// `C_e = (R_hat/gamma_e) D^{-1}`, `C_h = R_hat D^{-1} R_hat`. All three are
/// spectral functions of `R_hat`, so they are computed on its eigenvalues:
/// `lambda/(lambda+x)`, `lambda*x/(lambda+x)`, `lambda^2/(lambda+x)` with
/// `x = 1/gamma_e`, which also makes `C_h + C_e = R_hat` exact per mode.
pub fn mmse_stats(r_hat: &HermitianMatrix, gamma_e: f64) -> Result<EstimatorStats> {
    let eig = psd_eigenvalues(r_hat, gamma_e)?;
    let x = 1.0 / gamma_e;
    if !(x > 0.0) {
        return Err(Error::Internal(format!(
            "regularizer 1/gamma_e = {x} is not positive"
        )));
    }
    let c_h = eig.reconstruct_mapped(|l| {
        let l = l.max(0.0);
        l * l / (l + x)
    });
    let c_e = eig.reconstruct_mapped(|l| {
        let l = l.max(0.0);
        l * x / (l + x)
    });
    let filter = eig.reconstruct_mapped(|l| {
        let l = l.max(0.0);
        l / (l + x)
    });
    Ok(EstimatorStats { c_h, c_e, filter })
}

/// One-shot MMSE estimate `h_tilde = R_hat D^{-1} y / (M_m sqrt(P_m))` from a
/// raw pilot observation `y = M_m sqrt(P_m) h + z`.
///
/// Rebuilds the filter on every call; loops should build [`mmse_stats`] once
/// and use [`EstimatorStats::estimate`].
pub fn estimate_channel(
    y: &[Complex64],
    r_hat: &HermitianMatrix,
    pilot: &PilotConfig,
) -> Result<Vec<Complex64>> {
    if y.len() != r_hat.dim() {
        return Err(Error::Argument(format!(
            "observation has dimension {}, prior expects {}",
            y.len(),
            r_hat.dim()
        )));
    }
    mmse_stats(r_hat, pilot.gamma_e)?.estimate(y, pilot)
}

/// Closed-form estimate-covariance trace:
/// `trace(C_h) = trace(R_hat) + (1/gamma_e^2) trace(D^{-1}) - L_t/gamma_e`,
/// evaluated with a Cholesky factorization of `D` (no eigendecomposition).
pub fn trace_c_h(r_hat: &HermitianMatrix, gamma_e: f64) -> Result<f64> {
    if !(gamma_e > 0.0) || !gamma_e.is_finite() {
        return Err(Error::Argument(format!(
            "pilot SNR must be positive and finite, got {gamma_e}"
        )));
    }
    let x = 1.0 / gamma_e;
    let d = r_hat.add_scaled_identity(x);
    let chol = d.cholesky()?;
    let l_t = r_hat.dim() as f64;
    Ok(r_hat.trace() + x * x * chol.inverse_trace() - l_t * x)
}

/// Accuracy report of the low-SNR series expansion of `trace(C_h)`'s
/// middle term: `(1/gamma_e^2) trace(D^{-1})` is approximated by
/// `trace(I/gamma_e - R_hat + gamma_e R_hat R_hat)`. Diagnostic only —
/// nothing in the scheduler consumes the approximation.
#[derive(Debug, Clone, Copy)]
pub struct NeumannDiagnostic {
    /// `(1/gamma_e^2) trace(D^{-1})`, computed exactly.
    pub exact: f64,
    /// The truncated-series value.
    pub approximate: f64,
    /// `|approximate - exact| / |exact|`.
    pub relative_error: f64,
}

/// Compares the truncated low-SNR series against the exact middle term of
/// [`trace_c_h`].
pub fn neumann_diagnostic(r_hat: &HermitianMatrix, gamma_e: f64) -> Result<NeumannDiagnostic> {
    if !(gamma_e > 0.0) || !gamma_e.is_finite() {
        return Err(Error::Argument(format!(
            "pilot SNR must be positive and finite, got {gamma_e}"
        )));
    }
    let x = 1.0 / gamma_e;
    let d = r_hat.add_scaled_identity(x);
    let exact = x * x * d.cholesky()?.inverse_trace();
    let l_t = r_hat.dim() as f64;
    let approximate = l_t * x - r_hat.trace() + gamma_e * r_hat.product_trace(r_hat);
    let relative_error = (approximate - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
    Ok(NeumannDiagnostic {
        exact,
        approximate,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gram, sample_complex_gaussian, RngStream};

    fn random_psd(dim: usize, rows: usize, seed: u64) -> HermitianMatrix {
        let mut rng = RngStream::new(seed, 0);
        let x: Vec<Complex64> = (0..rows * dim).map(|_| rng.complex_unit_normal()).collect();
        gram(&x, dim)
    }

    fn default_pilot() -> PilotConfig {
        PilotConfig::new(9, 39.90524707222871, 1.0).unwrap()
    }

    #[test]
    fn pilot_snr_is_derived_and_validated() {
        let p = default_pilot();
        assert!((p.gamma_e - 9.0 * p.p_m).abs() < 1e-12 * p.gamma_e);
        let mut bad = p;
        bad.gamma_e *= 1.0 + 1e-6;
        assert!(bad.validate().is_err());
        assert!(PilotConfig::new(0, 1.0, 1.0).is_err());
        assert!(PilotConfig::new(9, 0.0, 1.0).is_err());
        assert!(PilotConfig::new(9, 1.0, -1.0).is_err());
    }

    #[test]
    fn estimate_and_error_covariances_split_the_prior() {
        let r_hat = random_psd(6, 9, 11);
        let stats = mmse_stats(&r_hat, 3.7).unwrap();
        let sum = stats.c_h.linear_comb(1.0, &stats.c_e, 1.0);
        let gap = sum.linear_comb(1.0, &r_hat, -1.0).frobenius_norm();
        assert!(gap <= 1e-10 * r_hat.frobenius_norm());
        assert!(stats.c_h.min_eigenvalue().unwrap() >= -1e-12);
        assert!(stats.c_e.min_eigenvalue().unwrap() >= -1e-12);
    }

    #[test]
    fn noiseless_pilots_recover_the_prior() {
        let r_hat = random_psd(5, 8, 3);
        let stats = mmse_stats(&r_hat, 1e12).unwrap();
        let gap = stats.c_h.linear_comb(1.0, &r_hat, -1.0).frobenius_norm();
        assert!(gap <= 1e-6 * r_hat.frobenius_norm());
        assert!(stats.c_e.trace() <= 1e-6 * r_hat.trace());
    }

    #[test]
    fn uninformative_pilots_estimate_nothing() {
        let r_hat = random_psd(5, 8, 4);
        let stats = mmse_stats(&r_hat, 1e-12).unwrap();
        assert!(stats.c_h.trace() <= 1e-6 * r_hat.trace());
    }

    #[test]
    fn estimate_quality_is_monotone_in_pilot_snr() {
        let r_hat = random_psd(5, 8, 5);
        let mut prev = 0.0;
        for gamma in [1e-3, 1e-1, 1.0, 10.0, 1e3, 1e6] {
            let t = trace_c_h(&r_hat, gamma).unwrap();
            assert!(t >= prev - 1e-12, "not monotone at gamma_e = {gamma}");
            prev = t;
        }
    }

    #[test]
    fn closed_form_trace_matches_definition() {
        // Scalar-multiple-of-identity case with hand-computed value.
        let eye = HermitianMatrix::scaled_identity(2, 1.0);
        let t = trace_c_h(&eye, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        // Vanishing prior: all three terms cancel.
        let zero = HermitianMatrix::zeros(4);
        assert!(trace_c_h(&zero, 2.5).unwrap().abs() < 1e-12);
        assert!(mmse_stats(&zero, 2.5).unwrap().c_h.trace().abs() < 1e-15);
        // Random PSD prior against the definitional trace.
        let r_hat = random_psd(6, 9, 7);
        let direct = mmse_stats(&r_hat, 3.7).unwrap().c_h.trace();
        let closed = trace_c_h(&r_hat, 3.7).unwrap();
        assert!((closed - direct).abs() <= 1e-10 * direct);
    }

    #[test]
    fn zero_observation_estimates_zero() {
        let r_hat = random_psd(4, 6, 9);
        let y = vec![Complex64::ZERO; 4];
        let h = estimate_channel(&y, &r_hat, &default_pilot()).unwrap();
        assert!(h.iter().all(|z| z.norm() == 0.0));
        let short = vec![Complex64::ZERO; 3];
        assert!(estimate_channel(&short, &r_hat, &default_pilot()).is_err());
    }

    #[test]
    fn noiseless_observation_is_reproduced() {
        let r_hat = random_psd(5, 8, 13);
        let pilot = PilotConfig::new(9, 40.0, 9.0 * 40.0 / 1e12).unwrap();
        assert!((pilot.gamma_e - 1e12).abs() < 1.0);
        let mut rng = RngStream::new(77, 0);
        let h = sample_complex_gaussian(&r_hat, &mut rng, 1)
            .unwrap()
            .remove(0);
        let scale = pilot.m_m as f64 * pilot.p_m.sqrt();
        let y: Vec<Complex64> = h.iter().map(|&z| scale * z).collect();
        let est = estimate_channel(&y, &r_hat, &pilot).unwrap();
        let err: f64 = est
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-6 * norm);
    }

    #[test]
    fn one_shot_estimate_equals_cached_filter() {
        let r_hat = random_psd(5, 8, 21);
        let pilot = default_pilot();
        let stats = mmse_stats(&r_hat, pilot.gamma_e).unwrap();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..4 {
            let y: Vec<Complex64> = (0..5).map(|_| rng.complex_unit_normal()).collect();
            let a = estimate_channel(&y, &r_hat, &pilot).unwrap();
            let b = stats.estimate(&y, &pilot).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn empirical_estimate_covariance_matches_c_h() {
        let r_hat = random_psd(4, 7, 31);
        let pilot = default_pilot();
        let stats = mmse_stats(&r_hat, pilot.gamma_e).unwrap();
        let dim = r_hat.dim();
        let scale = pilot.m_m as f64 * pilot.p_m.sqrt();
        let noise_std = (pilot.m_m as f64 * pilot.sigma_m2).sqrt();
        let mut rng = RngStream::new(4242, 0);
        let sampler = crate::numerics::GaussianSampler::new(&r_hat).unwrap();
        let n = 100_000;
        let mut acc = vec![Complex64::ZERO; dim * dim];
        for _ in 0..n {
            let h = sampler.draw(&mut rng);
            let y: Vec<Complex64> = h
                .iter()
                .map(|&z| scale * z + noise_std * rng.complex_unit_normal())
                .collect();
            let est = stats.estimate(&y, &pilot).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    acc[i * dim + j] += est[i] * est[j].conj();
                }
            }
        }
        let mut err2 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let emp = acc[i * dim + j] / n as f64;
                err2 += (emp - stats.c_h.get(i, j)).norm_sqr();
            }
        }
        assert!(err2.sqrt() <= 0.05 * stats.c_h.frobenius_norm());
    }

    #[test]
    fn low_snr_series_is_accurate_only_at_low_snr() {
        let r_hat = random_psd(5, 8, 41);
        // Normalize so gamma_e * ||R|| is meaningful.
        let r_hat = r_hat.scale(1.0 / r_hat.trace());
        let low = neumann_diagnostic(&r_hat, 1e-3).unwrap();
        assert!(
            low.relative_error < 1e-4,
            "low-SNR error {}",
            low.relative_error
        );
        let high = neumann_diagnostic(&r_hat, 1e3).unwrap();
        assert!(high.relative_error > low.relative_error);
    }

    #[test]
    fn indefinite_prior_is_rejected() {
        let bad = HermitianMatrix::scaled_identity(3, -1e-6);
        assert!(matches!(mmse_stats(&bad, 1.0), Err(Error::NotPsd { .. })));
        assert!(mmse_stats(&HermitianMatrix::zeros(3), 0.0).is_err());
    }
}
