//! Stochastic verification of the analytical chain.
//!
//! Every closed-form quantity the scheduler relies on — the two-source
//! small-scale decomposition, the pilot-based MMSE estimate, the aging
//! recursion, the beamformed SINR, and the linearized large-scale error
//! covariance — is re-derived here by direct simulation of the generative
//! model, with no shared code path beyond the statistics under test. The
//! draws are sequential and seed-deterministic; accumulation uses
//! compensated summation so totals are stable to the last few bits even
//! over millions of samples.

use num_complex::Complex64;

use crate::channel::{steering_tx, temporal_coeff, AgedChannelSampler, UserGeometry};
use crate::estimation::{mmse_stats, EstimatorStats};
use crate::numerics::{dot_conj, GaussianSampler, HermitianMatrix, RngStream};
use crate::rate::{sinr, FramePlan, SystemModel};
use crate::sensing::error_direction;
use crate::{Error, Result};

/// Default tolerance on the relative SINR error a report is flagged at.
pub const SINR_TOLERANCE: f64 = 0.05;

/// Substream offset for the per-`(user, aging index)` simulation tasks, so
/// they never collide with other consumers of the same master seed.
const MC_STREAM_BASE: u64 = 1 << 33;

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Empirical-vs-analytical SINR comparison for one `(user, aging index)`.
#[derive(Debug, Clone)]
pub struct McReport {
    /// The probed user `k`.
    pub user: usize,
    /// The probed aging index `n` (blocks since the last update).
    pub aging_index: u32,
    /// Number of Monte-Carlo draws behind every statistic below.
    pub samples: usize,
    /// Empirical mean of the beamformed signal inner product `h^H f_k`.
    pub signal_mean: Complex64,
    /// Its analytical value `rho_{k,n} sqrt(tr C_{h,k})`.
    pub signal_analytical: f64,
    /// Empirical second moments `E[|h^H f_i|^2]`, one per beam.
    pub second_moments: Vec<f64>,
    /// Their analytical values (`i = k` includes the coherent part).
    pub second_moments_analytical: Vec<f64>,
    /// Empirical variance of the own-beam gain (beam-gain uncertainty).
    pub beam_gain_variance: f64,
    /// SINR assembled from the empirical moments.
    pub empirical_sinr: f64,
    /// Closed-form SINR at the same `(k, n)`.
    pub analytical_sinr: f64,
    /// `|empirical - analytical| / analytical` (infinite when the
    /// analytical value is zero but the empirical one is not).
    pub relative_error: f64,
}

impl McReport {
    /// Whether the report breaches `tolerance` on the relative SINR error.
    pub fn exceeds(&self, tolerance: f64) -> bool {
        !(self.relative_error <= tolerance)
    }

    /// Whether the report breaches the default [`SINR_TOLERANCE`].
    pub fn flagged(&self) -> bool {
        self.exceeds(SINR_TOLERANCE)
    }
}

fn relative_to(empirical: f64, analytical: f64) -> f64 {
    if analytical == 0.0 {
        if empirical == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (empirical - analytical).abs() / analytical.abs()
    }
}

/// Simulates the full generative chain at one `(user, aging index)` pair
/// and compares the empirical SINR against the closed form.
///
/// Per draw, for every user `i`: the estimable part and the sensing
/// residual are sampled independently (`h_hat_i ~ CN(0, R_hat_i)`,
/// `e_{r,i} ~ CN(0, R_{r,i})`, so `h_{i,1} = h_hat_i + e_{r,i}` has the full
/// aged-correlation covariance), a noisy pilot observation is formed, and
/// the MMSE estimate drives a trace-normalized beam. User `k`'s channel is
/// then aged `n` blocks and the beamformed moments are accumulated.
pub fn simulate_sinr(
    system: &SystemModel,
    plan: &FramePlan,
    k: usize,
    n: u32,
    samples: usize,
    rng: &mut RngStream,
) -> Result<McReport> {
    system.validate()?;
    plan.validate(&system.frame)?;
    if samples < 10_000 {
        return Err(Error::Argument(format!(
            "at least 10000 samples are required for a stable comparison, got {samples}"
        )));
    }
    let count = system.users.len();
    if k >= count {
        return Err(Error::Argument(format!(
            "user index {k} out of range for {count} users"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("aging index starts at 1".into()));
    }

    let pilot = &system.pilot;
    let mut stats: Vec<EstimatorStats> = Vec::with_capacity(count);
    let mut traces = Vec::with_capacity(count);
    let mut samplers_hat = Vec::with_capacity(count);
    let mut samplers_err = Vec::with_capacity(count);
    for (i, user) in system.users.iter().enumerate() {
        let r_hat = user.large.effective_at(plan.t_l)?;
        let st = mmse_stats(&r_hat, pilot.gamma_e)?;
        let trace = st.c_h.trace();
        if !(trace > 0.0) {
            return Err(Error::Domain(format!(
                "user {i} has zero estimate-covariance trace; its beam is undefined"
            )));
        }
        traces.push(trace);
        samplers_hat.push(GaussianSampler::new(&r_hat)?);
        let r_r = user
            .large
            .error_direction
            .scale(user.large.crb.crb_at(plan.t_l)?);
        samplers_err.push(GaussianSampler::new(&r_r)?);
        stats.push(st);
    }

    let target = &system.users[k];
    let rho = temporal_coeff(&target.temporal, n);
    let aged = AgedChannelSampler::new(rho, &target.large.spatial, target.large.beta)?;

    let pilot_gain = pilot.m_m as f64 * pilot.p_m.sqrt();
    let noise_std = (pilot.m_m as f64 * pilot.sigma_m2).sqrt();

    let mut signal_re = Kahan::default();
    let mut signal_im = Kahan::default();
    let mut secmom = vec![Kahan::default(); count];
    let mut beams: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    let mut h_k1: Vec<Complex64> = Vec::new();
    for _ in 0..samples {
        beams.clear();
        for i in 0..count {
            let h_hat = samplers_hat[i].draw(rng);
            let e_r = samplers_err[i].draw(rng);
            let y: Vec<Complex64> = h_hat
                .iter()
                .map(|&h| h * pilot_gain + rng.complex_unit_normal() * noise_std)
                .collect();
            let estimate = stats[i].estimate(&y, pilot)?;
            let normalize = 1.0 / traces[i].sqrt();
            beams.push(estimate.into_iter().map(|z| z * normalize).collect());
            if i == k {
                h_k1 = h_hat.iter().zip(&e_r).map(|(&a, &b)| a + b).collect();
            }
        }
        let h_kn = aged.draw(&h_k1, rng)?;
        for (i, beam) in beams.iter().enumerate() {
            let g = dot_conj(&h_kn, beam);
            if i == k {
                signal_re.add(g.re);
                signal_im.add(g.im);
            }
            secmom[i].add(g.norm_sqr());
        }
    }

    let s = samples as f64;
    let signal_mean = Complex64::new(signal_re.value() / s, signal_im.value() / s);
    let second_moments: Vec<f64> = secmom.iter().map(|a| a.value() / s).collect();
    let beam_gain_variance = second_moments[k] - signal_mean.norm_sqr();

    let signal_analytical = rho * traces[k].sqrt();
    let beta_k = target.large.beta;
    let spatial_k = target.large.spatial.matrix();
    let second_moments_analytical: Vec<f64> = (0..count)
        .map(|i| {
            let cross = beta_k * spatial_k.product_trace(&stats[i].c_h) / traces[i];
            if i == k {
                cross + rho * rho * traces[k]
            } else {
                cross
            }
        })
        .collect();

    let mut denominator = system.sigma_c2;
    for (power, moment) in system.powers.iter().zip(&second_moments) {
        denominator += power * moment;
    }
    denominator -= system.powers[k] * signal_mean.norm_sqr();
    let empirical_sinr = system.powers[k] * signal_mean.norm_sqr() / denominator;
    let analytical_sinr = sinr(k, n, &system.powers, &stats, &system.users, system.sigma_c2)?;

    Ok(McReport {
        user: k,
        aging_index: n,
        samples,
        signal_mean,
        signal_analytical,
        second_moments,
        second_moments_analytical,
        beam_gain_variance,
        empirical_sinr,
        analytical_sinr,
        relative_error: relative_to(empirical_sinr, analytical_sinr),
    })
}

/// Runs [`simulate_sinr`] for every user at the shallow, middle, and deep
/// aging indices of the plan's longest update interval
/// (`n ∈ {1, ceil(N_m / 2), N_m}`, deduplicated).
///
/// Each `(user, n)` pair runs on its own substream of `rng`'s master seed,
/// so the reports are independent of execution order. Breaches of the 5%
/// tolerance are visible via [`McReport::flagged`].
pub fn verify_sinr_formula(
    system: &SystemModel,
    plan: &FramePlan,
    samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<McReport>> {
    system.validate()?;
    plan.validate(&system.frame)?;
    let n_max = *plan.n_m.iter().max().expect("validated: M >= 1");
    let mut indices = vec![1, n_max.div_ceil(2), n_max];
    indices.sort_unstable();
    indices.dedup();
    let mut reports = Vec::with_capacity(system.users.len() * indices.len());
    let mut task = 0u64;
    for k in 0..system.users.len() {
        for &n in &indices {
            let mut sub = rng.substream(MC_STREAM_BASE + task);
            task += 1;
            reports.push(simulate_sinr(system, plan, k, n, samples, &mut sub)?);
        }
    }
    Ok(reports)
}

/// Outcome of the linearized-covariance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaMethodCheck {
    /// Frobenius-relative distance between the empirical covariance of
    /// `f(theta_hat) - f(theta)` and the linearized model `crb * f' f'^H`.
    pub relative_error: f64,
    /// Set when `crb` is beyond the trustworthy linearization regime
    /// (above 1e-3 rad^2); the check still runs.
    pub warning: bool,
}

/// Monte-Carlo check of the first-order error covariance: samples
/// `theta_hat = theta + N(0, crb)`, forms `f = sqrt(beta) a(theta)`, and
/// compares the raw second moment of `f(theta_hat) - f(theta)` against the
/// rank-one linearized covariance.
pub fn verify_delta_method(
    geom: &UserGeometry,
    l_t: usize,
    crb: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<DeltaMethodCheck> {
    geom.validate()?;
    if !(crb >= 0.0) || !crb.is_finite() {
        return Err(Error::Argument(format!(
            "squared angle error must be nonnegative and finite, got {crb}"
        )));
    }
    if samples == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    if crb == 0.0 {
        // Both the empirical and the analytical covariance are exactly zero.
        return Ok(DeltaMethodCheck {
            relative_error: 0.0,
            warning: false,
        });
    }
    let warning = crb > 1e-3;
    let analytical = error_direction(geom, l_t)?.scale(crb);
    let norm = analytical.frobenius_norm();
    if !(norm > 0.0) {
        return Err(Error::Domain(
            "the error direction vanishes (single-antenna broadside); the relative \
             comparison is undefined"
                .into(),
        ));
    }
    let sqrt_beta = geom.beta.sqrt();
    let reference: Vec<Complex64> = steering_tx(geom.theta, l_t)?
        .into_iter()
        .map(|v| v * sqrt_beta)
        .collect();
    let std = crb.sqrt();
    let mut accumulated = HermitianMatrix::zeros(l_t);
    for _ in 0..samples {
        let theta_hat = geom.theta + std * rng.standard_normal();
        let perturbed = steering_tx(theta_hat, l_t)?;
        let difference: Vec<Complex64> = perturbed
            .iter()
            .zip(&reference)
            .map(|(&v, &f)| v * sqrt_beta - f)
            .collect();
        accumulated = accumulated.add(&HermitianMatrix::from_outer(&difference, 1.0));
    }
    let empirical = accumulated.scale(1.0 / samples as f64);
    Ok(DeltaMethodCheck {
        relative_error: empirical.sub(&analytical).frobenius_norm() / norm,
        warning,
    })
}
