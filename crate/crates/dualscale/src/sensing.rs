//! Radar-sensing accuracy and its effect on large-scale channel knowledge.
//!
//! Sensing estimates each user's direction of arrival; any unbiased
//! estimator's angle variance is bounded below by a CRB that decays as
//! `c_k / T_l` with the sensing duration. The delta method maps that angle
//! error into a rank-one covariance `R_r = CRB * f'(theta) f'(theta)^H` on
//! the mean channel `f(theta) = sqrt(beta) a(theta)`. The usable ("effective")
//! correlation for downstream MMSE estimation is `R_hat = beta R - R_r`,
//! which is positive semidefinite only when sensing is accurate enough —
//! that requirement, together with the accuracy target `Gamma_k`, defines
//! the minimum feasible sensing duration.

use num_complex::Complex64;

use crate::channel::{steering_derivative, steering_tx, SpatialCorrelation, UserGeometry};
use crate::numerics::{dot_conj, HermitianMatrix, PSD_TOLERANCE};
use crate::{Error, Result};

/// Radar-path constants for one sensing target.
#[derive(Debug, Clone, Copy)]
pub struct SensingScene {
    /// Complex reflection coefficient of the target.
    pub alpha: Complex64,
    /// Matched-filtering gain (linear), > 0.
    pub g: f64,
    /// Receive antenna count, >= 1.
    pub l_r: usize,
    /// Sensing noise variance (linear), > 0.
    pub sigma_r2: f64,
}

impl SensingScene {
    /// Validated constructor.
    pub fn new(alpha: Complex64, g: f64, l_r: usize, sigma_r2: f64) -> Result<Self> {
        let s = Self {
            alpha,
            g,
            l_r,
            sigma_r2,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(Error::Argument(format!(
                "matched-filtering gain must be positive, got {}",
                self.g
            )));
        }
        if self.l_r == 0 {
            return Err(Error::Argument("receive antenna count must be >= 1".into()));
        }
        if !(self.sigma_r2 > 0.0) || !self.sigma_r2.is_finite() {
            return Err(Error::Argument(format!(
                "sensing noise variance must be positive, got {}",
                self.sigma_r2
            )));
        }
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return Err(Error::Argument(
                "reflection coefficient must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Inverse-linear CRB model: `CRB(T_l) = c_k / T_l`.
#[derive(Debug, Clone, Copy)]
pub struct CrbModel {
    c: f64,
}

impl CrbModel {
    /// Wraps a coefficient (must be positive and finite).
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Argument(format!(
                "CRB coefficient must be positive and finite, got {c}"
            )));
        }
        Ok(Self { c })
    }

    /// The coefficient `c_k` (units: rad^2 * time).
    pub fn coefficient(&self) -> f64 {
        self.c
    }

    /// `CRB(T_l) = c_k / T_l` (rad^2).
    pub fn crb_at(&self, t_l: f64) -> Result<f64> {
        if !(t_l > 0.0) {
            return Err(Error::Argument(format!(
                "sensing duration must be positive, got {t_l}"
            )));
        }
        Ok(self.c / t_l)
    }
}

/// Rank-one large-scale error model: `R_r = scale * direction` with
/// `direction = f'(theta) f'(theta)^H`.
#[derive(Debug, Clone)]
pub struct LargeScaleError {
    /// `f'(theta) f'(theta)^H` with `f(theta) = sqrt(beta) a(theta)`; PSD, rank 1.
    pub direction: HermitianMatrix,
    /// CRB value (rad^2), >= 0.
    pub scale: f64,
}

impl LargeScaleError {
    /// Validated constructor.
    pub fn new(direction: HermitianMatrix, scale: f64) -> Result<Self> {
        if !(scale >= 0.0) {
            return Err(Error::Argument(format!(
                "error scale must be nonnegative, got {scale}"
            )));
        }
        Ok(Self { direction, scale })
    }

    /// The error covariance `scale * direction`.
    pub fn covariance(&self) -> HermitianMatrix {
        self.direction.scale(self.scale)
    }
}

/// The rank-one direction matrix `f'(theta) f'(theta)^H` of the delta-method
/// error, with `f(theta) = sqrt(beta) a(theta)`.
pub fn error_direction(geom: &UserGeometry, l_t: usize) -> Result<HermitianMatrix> {
    geom.validate()?;
    let d = steering_derivative(geom.theta, l_t)?;
    Ok(HermitianMatrix::from_outer(&d, geom.beta))
}

/// Angle CRB coefficient under the matched sensing beam `w = a*(theta_k)`.
///
/// With the receive response `g(theta) = b(theta) (a(theta)^T w)` the Fisher
/// curvature after projecting out the unknown complex amplitude is
/// `bracket = |g'|^2 - |g'^H g|^2 / |g|^2`, and
/// `c_k = sigma_r^2 / (2 |alpha_eff|^2 * bracket)` with
/// `|alpha_eff|^2 = G * L_r * L_t * |alpha_k|^2`.
pub fn crb_coefficient(scene: &SensingScene, theta_k: f64, l_t: usize) -> Result<CrbModel> {
    scene.validate()?;
    if l_t == 0 {
        return Err(Error::Argument(
            "transmit antenna count must be >= 1".into(),
        ));
    }
    if !theta_k.is_finite() {
        return Err(Error::Argument(format!(
            "angle must be finite, got {theta_k}"
        )));
    }
    let a = steering_tx(theta_k, l_t)?;
    let a_d = steering_derivative(theta_k, l_t)?;
    let b = steering_tx(theta_k, scene.l_r)?;
    let b_d = steering_derivative(theta_k, scene.l_r)?;
    // w = a*(theta_k); scalars s = a^T w = |a|^2 = 1 and s' = a'^T w.
    let s = Complex64::new(a.iter().map(|z| z.norm_sqr()).sum::<f64>(), 0.0);
    let s_d: Complex64 = a_d.iter().zip(&a).map(|(d, ai)| d * ai.conj()).sum();
    // g = s b; g' = s b' + s' b.
    let g: Vec<Complex64> = b.iter().map(|&bi| s * bi).collect();
    let g_d: Vec<Complex64> = b_d
        .iter()
        .zip(&b)
        .map(|(&bdi, &bi)| s * bdi + s_d * bi)
        .collect();
    let g_norm2 = g.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let gd_norm2 = g_d.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let cross = dot_conj(&g_d, &g);
    let bracket = gd_norm2 - cross.norm_sqr() / g_norm2;
    if !(bracket > 1e-15) {
        return Err(Error::DegenerateGeometry {
            user: 0,
            curvature: bracket,
        });
    }
    let alpha_eff2 = scene.g * (scene.l_r as f64) * (l_t as f64) * scene.alpha.norm_sqr();
    CrbModel::new(scene.sigma_r2 / (2.0 * alpha_eff2 * bracket))
}

/// The delta-method error covariance `crb * direction`.
pub fn sensing_error_covariance(direction: &HermitianMatrix, crb: f64) -> Result<HermitianMatrix> {
    if !(crb >= 0.0) {
        return Err(Error::Argument(format!(
            "CRB must be nonnegative, got {crb}"
        )));
    }
    Ok(direction.scale(crb))
}

/// The sensing-degraded effective correlation `R_hat = beta * R - R_r`.
///
/// Verified positive semidefinite within the `-1e-10` eigenvalue tolerance;
/// a lower eigenvalue means the sensing backing this `R_r` was too coarse.
/// The entrywise difference is returned unmodified — eigenvalues inside the
/// tolerance band are treated as zero by every consumer that needs a square
/// root, and keeping the raw matrix preserves the exact algebraic identities
/// of the estimator statistics.
pub fn effective_correlation(
    beta: f64,
    spatial: &SpatialCorrelation,
    r_r: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if !(beta > 0.0) {
        return Err(Error::Argument(format!(
            "channel gain must be positive, got {beta}"
        )));
    }
    let r_hat = spatial.matrix().linear_comb(beta, r_r, -1.0);
    let min_eig = r_hat.min_eigenvalue()?;
    if min_eig < -PSD_TOLERANCE {
        return Err(Error::SensingTooCoarse {
            min_eigenvalue: min_eig,
        });
    }
    Ok(r_hat)
}

/// Everything the scheduler needs to know about one user's large scale:
/// gain, spatial correlation, CRB model, and the error direction matrix.
#[derive(Debug, Clone)]
pub struct UserLargeScale {
    /// Average linear channel gain.
    pub beta: f64,
    /// Gain-normalized spatial correlation (unit trace).
    pub spatial: SpatialCorrelation,
    /// Inverse-linear angle CRB.
    pub crb: CrbModel,
    /// Rank-one delta-method direction `f' f'^H`.
    pub error_direction: HermitianMatrix,
}

impl UserLargeScale {
    /// Derives the large-scale quantities from geometry and radar constants.
    pub fn derive(
        geom: &UserGeometry,
        scene: &SensingScene,
        l_t: usize,
        quad_order: usize,
    ) -> Result<Self> {
        let spatial = crate::channel::spatial_correlation(geom, l_t, quad_order)?;
        let crb = crb_coefficient(scene, geom.theta, l_t)?;
        let error_direction = error_direction(geom, l_t)?;
        Ok(Self {
            beta: geom.beta,
            spatial,
            crb,
            error_direction,
        })
    }

    /// `beta * R - (c / T_l) * direction` without the PSD check; the hot
    /// path of the rate evaluator calls this under a schedule that already
    /// guarantees `T_l >= T_l_min`.
    pub fn raw_effective_at(&self, t_l: f64) -> HermitianMatrix {
        debug_assert!(t_l > 0.0);
        self.spatial.matrix().linear_comb(
            self.beta,
            &self.error_direction,
            -self.crb.coefficient() / t_l,
        )
    }

    /// PSD-checked effective correlation at sensing duration `t_l`.
    pub fn effective_at(&self, t_l: f64) -> Result<HermitianMatrix> {
        let crb = self.crb.crb_at(t_l)?;
        let r_r = sensing_error_covariance(&self.error_direction, crb)?;
        effective_correlation(self.beta, &self.spatial, &r_r)
    }

    /// Smallest sensing duration making the effective correlation PSD
    /// (within tolerance), located by bisection to 1e-9 relative. Returns 0
    /// when even vanishing durations are PSD, and infinity when no duration
    /// up to `budget` is.
    pub fn psd_min_time(&self, budget: f64) -> Result<f64> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::Argument(format!(
                "duration budget must be positive and finite, got {budget}"
            )));
        }
        let feasible = |t: f64| -> Result<bool> {
            Ok(self.raw_effective_at(t).min_eigenvalue()? >= -PSD_TOLERANCE)
        };
        let tiny = 1e-12;
        if feasible(tiny)? {
            return Ok(0.0);
        }
        if !feasible(budget)? {
            return Ok(f64::INFINITY);
        }
        let mut lo = tiny;
        let mut hi = budget;
        for _ in 0..200 {
            if hi - lo <= 1e-9 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if feasible(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Minimum feasible sensing duration together with the user that sets it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSensingTime {
    /// The duration itself, in the same time unit as the CRB coefficients.
    pub time: f64,
    /// Index of the user whose requirement binds.
    pub binding_user: usize,
}

/// Minimum feasible sensing duration over all users:
/// `max_k max(c_k / Gamma_k, T_psd_k)`, where `T_psd_k` is the PSD
/// feasibility threshold of user `k`. Errors with
/// [`Error::InfeasibleSensing`] (naming the binding user) when the result
/// exceeds `budget`, the total subframe duration.
pub fn min_sensing_time(
    users: &[UserLargeScale],
    gammas: &[f64],
    budget: f64,
) -> Result<MinSensingTime> {
    if users.is_empty() {
        return Err(Error::Argument("at least one user is required".into()));
    }
    if gammas.len() != users.len() {
        return Err(Error::Argument(format!(
            "{} accuracy targets for {} users",
            gammas.len(),
            users.len()
        )));
    }
    for (k, &g) in gammas.iter().enumerate() {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Argument(format!(
                "accuracy target for user {k} must be positive, got {g}"
            )));
        }
    }
    let mut t_min = f64::NEG_INFINITY;
    let mut binding = 0;
    for (k, (user, &gamma)) in users.iter().zip(gammas).enumerate() {
        let t_accuracy = user.crb.coefficient() / gamma;
        let t_psd = user.psd_min_time(budget)?;
        let t_k = t_accuracy.max(t_psd);
        if t_k > t_min {
            t_min = t_k;
            binding = k;
        }
    }
    if t_min > budget {
        return Err(Error::InfeasibleSensing {
            user: binding,
            t_min,
            budget,
        });
    }
    Ok(MinSensingTime {
        time: t_min,
        binding_user: binding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::spatial_correlation;

    fn test_scene(sigma_r2: f64) -> SensingScene {
        SensingScene::new(Complex64::ONE, 1e3, 8, sigma_r2).unwrap()
    }

    fn test_geometry() -> UserGeometry {
        UserGeometry::new(20f64.to_radians(), 1f64.to_radians(), 1.0).unwrap()
    }

    /// Independent Fisher-information oracle: finite differences of the
    /// noiseless matched-filter response `m(theta) = alpha_eff * g(theta)`
    /// over the parameters (theta, Re alpha_eff, Im alpha_eff), inverting
    /// the 3x3 information matrix to read off the angle variance.
    fn fim_oracle_crb(scene: &SensingScene, theta_k: f64, l_t: usize, t_l: f64) -> f64 {
        let w: Vec<Complex64> = steering_tx(theta_k, l_t)
            .unwrap()
            .into_iter()
            .map(|z| z.conj())
            .collect();
        let g_of = |theta: f64| -> Vec<Complex64> {
            let a = steering_tx(theta, l_t).unwrap();
            let b = steering_tx(theta, scene.l_r).unwrap();
            let s: Complex64 = a.iter().zip(&w).map(|(ai, wi)| ai * wi).sum();
            b.into_iter().map(|bi| s * bi).collect()
        };
        let g = g_of(theta_k);
        let h = 1e-6;
        let gp = g_of(theta_k + h);
        let gm = g_of(theta_k - h);
        let g_d: Vec<Complex64> = gp
            .iter()
            .zip(&gm)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        let alpha_eff = (scene.g * (scene.l_r as f64) * (l_t as f64)).sqrt() * scene.alpha;
        // Jacobian columns: d m / d theta, d m / d Re(alpha), d m / d Im(alpha).
        let cols: [Vec<Complex64>; 3] = [
            g_d.iter().map(|&z| alpha_eff * z).collect(),
            g.clone(),
            g.iter().map(|&z| Complex64::I * z).collect(),
        ];
        let mut fim = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let ip: Complex64 = dot_conj(&cols[i], &cols[j]);
                fim[i][j] = 2.0 * t_l / scene.sigma_r2 * ip.re;
            }
        }
        // (F^{-1})[0][0] by the adjugate of the 3x3 matrix.
        let det = fim[0][0] * (fim[1][1] * fim[2][2] - fim[1][2] * fim[2][1])
            - fim[0][1] * (fim[1][0] * fim[2][2] - fim[1][2] * fim[2][0])
            + fim[0][2] * (fim[1][0] * fim[2][1] - fim[1][1] * fim[2][0]);
        let minor00 = fim[1][1] * fim[2][2] - fim[1][2] * fim[2][1];
        minor00 / det
    }

    #[test]
    fn crb_matches_fisher_information_oracle() {
        let scene = test_scene(2.0);
        for theta_deg in [0.0f64, 20.0, 45.0] {
            let theta = theta_deg.to_radians();
            let model = crb_coefficient(&scene, theta, 8).unwrap();
            let t_l = 3.0;
            let crb = model.crb_at(t_l).unwrap();
            let oracle = fim_oracle_crb(&scene, theta, 8, t_l);
            let rel = (crb - oracle).abs() / oracle;
            assert!(
                rel < 1e-6,
                "theta = {theta_deg} deg: crb {crb:.6e} vs oracle {oracle:.6e} (rel {rel:.2e})"
            );
        }
    }

    #[test]
    fn crb_is_inverse_linear_in_duration() {
        let model = crb_coefficient(&test_scene(5.0), 0.3, 8).unwrap();
        let base = model.crb_at(1.0).unwrap();
        assert_eq!(model.crb_at(2.0).unwrap() * 2.0, base);
        assert_eq!(model.crb_at(0.5).unwrap() * 0.5, base);
        assert_eq!(model.crb_at(10.0).unwrap() * 10.0, base);
    }

    #[test]
    fn doubling_reflection_power_halves_the_coefficient() {
        let scene1 = SensingScene::new(Complex64::ONE, 1e3, 8, 2.0).unwrap();
        // |1 + i|^2 = 2 exactly.
        let scene2 = SensingScene::new(Complex64::new(1.0, 1.0), 1e3, 8, 2.0).unwrap();
        let c1 = crb_coefficient(&scene1, 0.2, 8).unwrap().coefficient();
        let c2 = crb_coefficient(&scene2, 0.2, 8).unwrap().coefficient();
        assert_eq!(c2 * 2.0, c1);
    }

    #[test]
    fn coefficient_ignores_reflection_phase() {
        let c_ref = crb_coefficient(&test_scene(1.0), 0.2, 8)
            .unwrap()
            .coefficient();
        for phi in [0.4, 1.3, 2.9] {
            let scene = SensingScene::new(Complex64::from_polar(1.0, phi), 1e3, 8, 1.0).unwrap();
            let c = crb_coefficient(&scene, 0.2, 8).unwrap().coefficient();
            assert!((c - c_ref).abs() <= 1e-12 * c_ref);
        }
    }

    #[test]
    fn single_receive_antenna_at_broadside_is_degenerate() {
        // L_t = L_r = 1: no aperture anywhere, angle unidentifiable.
        let scene = SensingScene::new(Complex64::ONE, 1e3, 1, 1.0).unwrap();
        let res = crb_coefficient(&scene, 0.0, 1);
        assert!(matches!(res, Err(Error::DegenerateGeometry { .. })));
    }

    #[test]
    fn error_covariance_scales_the_rank_one_direction() {
        let geom = test_geometry();
        let dir = error_direction(&geom, 8).unwrap();
        // crb = 0 -> zero matrix.
        let zero = sensing_error_covariance(&dir, 0.0).unwrap();
        assert_eq!(zero.frobenius_norm(), 0.0);
        // Rank <= 1: second-largest eigenvalue is negligible.
        let r_r = sensing_error_covariance(&dir, 1e-4).unwrap();
        let eig = r_r.eigh().unwrap();
        let vals = eig.values();
        assert!(vals[6].abs() <= 1e-12 * r_r.trace());
        // Trace identity: crb * beta * |a'(theta)|^2.
        let a_d = steering_derivative(geom.theta, 8).unwrap();
        let expect = 1e-4 * geom.beta * a_d.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((r_r.trace() - expect).abs() < 1e-12 * expect.max(1.0));
        // Negative CRB is rejected.
        assert!(sensing_error_covariance(&dir, -1.0).is_err());
    }

    #[test]
    fn effective_correlation_with_perfect_sensing_is_the_prior() {
        let geom = test_geometry();
        let spatial = spatial_correlation(&geom, 8, 64).unwrap();
        let zero = HermitianMatrix::zeros(8);
        let r_hat = effective_correlation(2.0, &spatial, &zero).unwrap();
        assert_eq!(r_hat, spatial.matrix().scale(2.0));
    }

    #[test]
    fn effective_correlation_trace_is_linear() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let t_l = user.psd_min_time(1e9).unwrap() * 2.0;
        let crb = user.crb.crb_at(t_l).unwrap();
        let r_r = sensing_error_covariance(&user.error_direction, crb).unwrap();
        let r_hat = effective_correlation(user.beta, &user.spatial, &r_r).unwrap();
        let expect = user.beta - r_r.trace();
        assert!((r_hat.trace() - expect).abs() < 1e-10);
    }

    #[test]
    fn too_coarse_sensing_is_rejected() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let t_psd = user.psd_min_time(1e9).unwrap();
        let res = user.effective_at(t_psd * 0.5);
        assert!(matches!(res, Err(Error::SensingTooCoarse { .. })));
    }

    #[test]
    fn psd_threshold_brackets_the_feasibility_boundary() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let t_psd = user.psd_min_time(1e9).unwrap();
        assert!(t_psd.is_finite() && t_psd > 0.0);
        let above = user
            .raw_effective_at(t_psd * (1.0 + 1e-6))
            .min_eigenvalue()
            .unwrap();
        let below = user
            .raw_effective_at(t_psd * (1.0 - 1e-6))
            .min_eigenvalue()
            .unwrap();
        assert!(above >= -PSD_TOLERANCE, "just-feasible side: {above:.3e}");
        assert!(below < -PSD_TOLERANCE, "just-infeasible side: {below:.3e}");
    }

    #[test]
    fn effective_min_eigenvalue_grows_with_duration() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let t_psd = user.psd_min_time(1e9).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for mult in [0.5, 0.8, 1.0, 1.5, 3.0, 10.0] {
            let min_eig = user
                .raw_effective_at(t_psd * mult)
                .min_eigenvalue()
                .unwrap();
            assert!(min_eig >= prev - 1e-14, "not monotone at multiplier {mult}");
            prev = min_eig;
        }
    }

    #[test]
    fn accuracy_bound_alone_sets_the_minimum_time() {
        // Single transmit antenna: f' = 0, so the PSD bound is vacuous and
        // the accuracy constraint c / Gamma binds alone. sigma_r2 is chosen
        // to make c exactly 1.
        let mut scene = SensingScene::new(Complex64::ONE, 1e3, 8, 1.0).unwrap();
        let c_unit = crb_coefficient(&scene, 0.3, 1).unwrap().coefficient();
        scene.sigma_r2 = 1.0 / c_unit;
        let c = crb_coefficient(&scene, 0.3, 1).unwrap().coefficient();
        assert_eq!(c, 1.0);
        let geom = UserGeometry::new(0.3, 0.05, 1.0).unwrap();
        let user = UserLargeScale::derive(&geom, &scene, 1, 64).unwrap();
        assert_eq!(user.psd_min_time(100.0).unwrap(), 0.0);
        let t = min_sensing_time(&[user], &[0.5], 100.0).unwrap();
        assert_eq!(t.time, 2.0);
        assert_eq!(t.binding_user, 0);
    }

    #[test]
    fn slack_accuracy_leaves_the_psd_bound() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let t_psd = user.psd_min_time(1e9).unwrap();
        let t = min_sensing_time(std::slice::from_ref(&user), &[1e30], 1e9).unwrap();
        assert_eq!(t.time, t_psd);
    }

    #[test]
    fn minimum_time_decreases_as_accuracy_relaxes() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let users = [user];
        let mut prev = f64::INFINITY;
        for gamma in [1e-6, 1e-5, 1e-4, 1e-3] {
            let t = min_sensing_time(&users, &[gamma], 1e12).unwrap().time;
            assert!(t <= prev, "not monotone at gamma {gamma}");
            prev = t;
        }
    }

    #[test]
    fn impossible_accuracy_is_infeasible_and_names_the_user() {
        let easy = UserLargeScale::derive(&test_geometry(), &test_scene(100.0), 8, 64).unwrap();
        let hard = easy.clone();
        let res = min_sensing_time(&[easy, hard], &[1e3, 1e-15], 2450.0);
        match res {
            Err(Error::InfeasibleSensing {
                user,
                t_min,
                budget,
            }) => {
                assert_eq!(user, 1);
                assert!(t_min > budget);
            }
            other => panic!("expected InfeasibleSensing, got {other:?}"),
        }
    }

    #[test]
    fn argument_validation() {
        let user = UserLargeScale::derive(&test_geometry(), &test_scene(1.0), 8, 64).unwrap();
        let users = [user];
        assert!(min_sensing_time(&[], &[], 1.0).is_err());
        assert!(min_sensing_time(&users, &[0.5, 0.5], 1.0).is_err());
        assert!(min_sensing_time(&users, &[0.0], 1.0).is_err());
        assert!(SensingScene::new(Complex64::ONE, 0.0, 8, 1.0).is_err());
        assert!(SensingScene::new(Complex64::ONE, 1.0, 0, 1.0).is_err());
        assert!(SensingScene::new(Complex64::ONE, 1.0, 8, 0.0).is_err());
        assert!(CrbModel::new(0.0).is_err());
        assert!(CrbModel::new(1.0).unwrap().crb_at(0.0).is_err());
    }
}
