//! Analytical per-block SINR, spectral efficiency, and the subframe rate.
//!
//! A subframe of `N` blocks spends `T_l` on sensing, then runs `M`
//! small-scale updates; update `m` spends one pilot burst of duration `T_m`
//! and serves data for `N_m` blocks. Under maximum-ratio transmission built
//! from the aged MMSE estimate, the SINR of user `k` in the `n`-th block
//! after an update has the closed form implemented by [`sinr`]; the subframe
//! rate weighs every block's spectral efficiency by the block duration and
//! discounts the estimation overhead at the freshest (first-block) rate.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::channel::{temporal_coeff, TemporalModel};
use crate::estimation::{mmse_stats, EstimatorStats, PilotConfig};
use crate::numerics::gram;
use crate::sensing::UserLargeScale;
use crate::{Error, Result};

/// Subframe geometry: block count and the fixed durations.
#[derive(Debug, Clone, Copy)]
pub struct FrameConfig {
    /// Total blocks `N` in the subframe.
    pub n_blocks: u32,
    /// Block duration `T_b`.
    pub t_b: f64,
    /// Pilot burst duration `T_m` per small-scale update.
    pub t_m: f64,
}

impl FrameConfig {
    /// Checks positivity (a zero pilot duration is allowed: it models
    /// hypothetical overhead-free updates).
    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 {
            return Err(Error::Argument("subframe must contain blocks".into()));
        }
        if !(self.t_b > 0.0) || !self.t_b.is_finite() {
            return Err(Error::Argument(format!(
                "block duration must be positive, got {}",
                self.t_b
            )));
        }
        if !(self.t_m >= 0.0) || !self.t_m.is_finite() {
            return Err(Error::Argument(format!(
                "pilot duration must be nonnegative, got {}",
                self.t_m
            )));
        }
        Ok(())
    }
}

/// One candidate subframe schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    /// Sensing duration (same time units as the frame config).
    pub t_l: f64,
    /// Blocks served by each of the `M = n_m.len()` small-scale updates.
    pub n_m: Vec<u32>,
}

impl FramePlan {
    /// Number of small-scale updates `M`.
    pub fn updates(&self) -> usize {
        self.n_m.len()
    }

    /// Whole sensing blocks `floor(T_l / T_b)` and the partial remainder
    /// `mod(T_l, T_b)`.
    pub fn sensing_split(&self, t_b: f64) -> (u32, f64) {
        let h = self.t_l.div_euclid(t_b);
        (h as u32, self.t_l.rem_euclid(t_b))
    }

    /// Checks the structural schedule invariants against a frame config:
    /// `floor(T_l/T_b) + sum(N_m) = N`, `T_l <= N*T_b`, `1 <= M <= N`, and
    /// every `N_m >= 1`.
    pub fn validate(&self, frame: &FrameConfig) -> Result<()> {
        frame.validate()?;
        if !(self.t_l >= 0.0) || !self.t_l.is_finite() {
            return Err(Error::Plan(format!(
                "sensing duration must be nonnegative, got {}",
                self.t_l
            )));
        }
        let n = self.n_blocks_total();
        if self.t_l > frame.n_blocks as f64 * frame.t_b {
            return Err(Error::Plan(format!(
                "sensing duration {} exceeds the subframe {}",
                self.t_l,
                frame.n_blocks as f64 * frame.t_b
            )));
        }
        if self.n_m.is_empty() {
            return Err(Error::Plan("at least one small-scale update".into()));
        }
        if self.n_m.len() as u32 > frame.n_blocks {
            return Err(Error::Plan(format!(
                "{} updates exceed {} blocks",
                self.n_m.len(),
                frame.n_blocks
            )));
        }
        if self.n_m.contains(&0) {
            return Err(Error::Plan("every update must serve >= 1 block".into()));
        }
        let (h, _) = self.sensing_split(frame.t_b);
        if h + n != frame.n_blocks {
            return Err(Error::Plan(format!(
                "{h} sensing blocks + {n} data blocks != {} total",
                frame.n_blocks
            )));
        }
        Ok(())
    }

    fn n_blocks_total(&self) -> u32 {
        self.n_m.iter().sum()
    }
}

/// Everything block-rate evaluation needs to know about one user.
#[derive(Debug, Clone)]
pub struct UserLink {
    /// Large-scale state: gain, spatial correlation, CRB, error direction.
    pub large: UserLargeScale,
    /// Aging (temporal correlation) model.
    pub temporal: TemporalModel,
}

/// Immutable multi-user system description shared by every plan evaluation.
#[derive(Debug, Clone)]
pub struct SystemModel {
    /// Per-user large-scale state and aging models.
    pub users: Vec<UserLink>,
    /// Pilot configuration of the small-scale updates.
    pub pilot: PilotConfig,
    /// Per-user data powers `p_k` (linear).
    pub powers: Vec<f64>,
    /// Data noise variance (linear).
    pub sigma_c2: f64,
    /// Subframe geometry.
    pub frame: FrameConfig,
}

impl SystemModel {
    /// Checks cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::Argument("at least one user is required".into()));
        }
        if self.powers.len() != self.users.len() {
            return Err(Error::Argument(format!(
                "{} powers for {} users",
                self.powers.len(),
                self.users.len()
            )));
        }
        for (k, &p) in self.powers.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Argument(format!(
                    "power of user {k} must be nonnegative, got {p}"
                )));
            }
        }
        if !(self.sigma_c2 > 0.0) || !self.sigma_c2.is_finite() {
            return Err(Error::Argument(format!(
                "noise variance must be positive, got {}",
                self.sigma_c2
            )));
        }
        let dim = self.users[0].large.spatial.dim();
        for (k, u) in self.users.iter().enumerate() {
            u.temporal.validate()?;
            if u.large.spatial.dim() != dim {
                return Err(Error::Argument(format!(
                    "user {k} has {} antennas, user 0 has {dim}",
                    u.large.spatial.dim()
                )));
            }
        }
        self.pilot.validate()?;
        self.frame.validate()
    }

    /// Total transmit power `P_t = sum_k p_k`.
    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Rate evaluation of one plan.
#[derive(Debug, Clone)]
pub struct RateReport {
    /// `se[k][n-1]`: spectral efficiency of user `k` in the `n`-th block
    /// after a small-scale update, for `n = 1..=max(N_m)`.
    pub se: Vec<Vec<f64>>,
    /// Duration-weighted subframe sum (spectral efficiency x time).
    pub total_rate: f64,
    /// `M*T_m + mod(T_l, T_b)` — the time discounted at first-block rates.
    pub overhead_time: f64,
}

fn check_user_inputs(
    k: usize,
    powers: &[f64],
    stats: &[EstimatorStats],
    users: &[UserLink],
    sigma_c2: f64,
) -> Result<()> {
    let count = users.len();
    if stats.len() != count || powers.len() != count {
        return Err(Error::Argument(format!(
            "{} stats and {} powers for {count} users",
            stats.len(),
            powers.len()
        )));
    }
    if k >= count {
        return Err(Error::Argument(format!("user {k} out of range {count}")));
    }
    if !(sigma_c2 > 0.0) || !sigma_c2.is_finite() {
        return Err(Error::Argument(format!(
            "noise variance must be positive, got {sigma_c2}"
        )));
    }
    Ok(())
}

/// Analytical downlink SINR of user `k` with an explicit aging coefficient
/// `rho` (see [`sinr`] for the aging-indexed form):
///
/// `gamma = p_k rho^2 tr(C_h,k) / (sum_i beta_k p_i tr(R_k C_h,i)/tr(C_h,i)
/// + sigma_c2)`,
///
/// where `R_k` is user `k`'s unit-trace spatial correlation and the `i = k`
/// term carries the self-interference of beamforming on an estimate.
pub fn sinr_at_rho(
    k: usize,
    rho: f64,
    powers: &[f64],
    stats: &[EstimatorStats],
    users: &[UserLink],
    sigma_c2: f64,
) -> Result<f64> {
    check_user_inputs(k, powers, stats, users, sigma_c2)?;
    if !rho.is_finite() {
        return Err(Error::Argument(format!(
            "aging coefficient must be finite, got {rho}"
        )));
    }
    let beta_k = users[k].large.beta;
    let spatial_k = users[k].large.spatial.matrix();
    let mut denom = sigma_c2;
    for (i, stat) in stats.iter().enumerate() {
        let tr_i = stat.c_h.trace();
        if !(tr_i > 0.0) {
            return Err(Error::Domain(format!(
                "user {i} has zero estimate-covariance trace; its beam is undefined"
            )));
        }
        denom += beta_k * powers[i] * spatial_k.product_trace(&stat.c_h) / tr_i;
    }
    Ok(powers[k] * rho * rho * stats[k].c_h.trace() / denom)
}

/// Analytical downlink SINR of user `k` in the `n`-th block after a
/// small-scale update (`n >= 1`), with `rho_{k,n}` taken from the user's
/// aging model.
pub fn sinr(
    k: usize,
    n: u32,
    powers: &[f64],
    stats: &[EstimatorStats],
    users: &[UserLink],
    sigma_c2: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("aging index starts at 1".into()));
    }
    check_user_inputs(k, powers, stats, users, sigma_c2)?;
    let rho = temporal_coeff(&users[k].temporal, n);
    sinr_at_rho(k, rho, powers, stats, users, sigma_c2)
}

/// Interference-agnostic SINR lower bound with explicit aging coefficient:
/// replaces each interference ratio by the worst case
/// `tr(R_k C)/tr(C) <= ||R_k||_2`, giving
/// `gamma_l = p_k rho^2 tr(C_h,k) / (beta_k P_t ||R_k||_2 + sigma_c2)`.
pub fn sinr_lower_bound_at_rho(
    k: usize,
    rho: f64,
    powers: &[f64],
    stats: &[EstimatorStats],
    users: &[UserLink],
    sigma_c2: f64,
) -> Result<f64> {
    check_user_inputs(k, powers, stats, users, sigma_c2)?;
    if !rho.is_finite() {
        return Err(Error::Argument(format!(
            "aging coefficient must be finite, got {rho}"
        )));
    }
    for (i, stat) in stats.iter().enumerate() {
        if !(stat.c_h.trace() > 0.0) {
            return Err(Error::Domain(format!(
                "user {i} has zero estimate-covariance trace; its beam is undefined"
            )));
        }
    }
    let beta_k = users[k].large.beta;
    let p_t: f64 = powers.iter().sum();
    let norm = users[k].large.spatial.matrix().spectral_norm()?;
    let denom = beta_k * p_t * norm + sigma_c2;
    Ok(powers[k] * rho * rho * stats[k].c_h.trace() / denom)
}

/// Aging-indexed form of [`sinr_lower_bound_at_rho`]; always `<= sinr`
/// within round-off, with equality when the spatial correlation is a
/// multiple of the identity.
pub fn sinr_lower_bound(
    k: usize,
    n: u32,
    powers: &[f64],
    stats: &[EstimatorStats],
    users: &[UserLink],
    sigma_c2: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("aging index starts at 1".into()));
    }
    check_user_inputs(k, powers, stats, users, sigma_c2)?;
    let rho = temporal_coeff(&users[k].temporal, n);
    sinr_lower_bound_at_rho(k, rho, powers, stats, users, sigma_c2)
}

/// Shannon spectral efficiency `log2(1 + gamma)` in bps/Hz.
pub fn spectral_efficiency(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Argument(format!(
            "SINR must be nonnegative, got {gamma}"
        )));
    }
    Ok((1.0 + gamma).log2())
}

/// Per-plan recombination shared by [`frame_rate`] and the fast evaluator.
///
/// Blocks-per-update lists that are permutations of each other must give
/// bit-identical totals, so the per-update prefix sums are aggregated by
/// multiplicity in ascending block-count order rather than in plan order.
fn combine_rate(se: &[Vec<f64>], plan: &FramePlan, frame: &FrameConfig) -> (f64, f64) {
    let max_nm = *plan.n_m.iter().max().expect("validated: M >= 1") as usize;
    combine_prefix(&se_prefix(se, max_nm), plan, frame)
}

/// Cumulative user-summed spectral efficiency:
/// `prefix[j] = sum_{n=1..j} sum_k se[k][n-1]` (users summed in index order
/// at fixed `n`, then block indices accumulated in ascending order).
fn se_prefix(se: &[Vec<f64>], max_nm: usize) -> Vec<f64> {
    let mut prefix = vec![0.0; max_nm + 1];
    for j in 1..=max_nm {
        let mut step = 0.0;
        for se_k in se {
            step += se_k[j - 1];
        }
        prefix[j] = prefix[j - 1] + step;
    }
    prefix
}

/// Recombines a prefix table into `(total_rate, overhead_time)`.
fn combine_prefix(prefix: &[f64], plan: &FramePlan, frame: &FrameConfig) -> (f64, f64) {
    let (_, rem) = plan.sensing_split(frame.t_b);
    let overhead = plan.updates() as f64 * frame.t_m + rem;
    let max_nm = *plan.n_m.iter().max().expect("validated: M >= 1") as usize;
    let mut counts = vec![0u32; max_nm + 1];
    for &nm in &plan.n_m {
        counts[nm as usize] += 1;
    }
    let mut sum_all = 0.0;
    for (j, &count) in counts.iter().enumerate() {
        if count > 0 {
            sum_all += count as f64 * prefix[j];
        }
    }
    (frame.t_b * sum_all - overhead * prefix[1], overhead)
}

/// Builds the per-user spectral-efficiency table `se[k][n-1]` for
/// `n = 1..=n_max` from per-user estimator statistics at one `T_l`.
fn se_table(stats: &[EstimatorStats], system: &SystemModel, n_max: u32) -> Result<Vec<Vec<f64>>> {
    let mut se = Vec::with_capacity(system.users.len());
    for k in 0..system.users.len() {
        let mut row = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let gamma = sinr(k, n, &system.powers, stats, &system.users, system.sigma_c2)?;
            row.push(spectral_efficiency(gamma)?);
        }
        se.push(row);
    }
    Ok(se)
}

/// Achievable subframe rate of a plan:
///
/// `total_rate = T_b sum_k sum_m sum_{n=1..N_m} SE_{k,n}
///             - (M T_m + mod(T_l, T_b)) sum_k SE_{k,1}`,
///
/// with the aging index `n` restarting at 1 after every small-scale update
/// and every statistic evaluated at the plan's `T_l`. Surfaces
/// [`Error::SensingTooCoarse`] when `T_l` is below the PSD threshold.
pub fn frame_rate(plan: &FramePlan, system: &SystemModel) -> Result<RateReport> {
    system.validate()?;
    plan.validate(&system.frame)?;
    let mut stats = Vec::with_capacity(system.users.len());
    for user in &system.users {
        let r_hat = user.large.effective_at(plan.t_l)?;
        stats.push(mmse_stats(&r_hat, system.pilot.gamma_e)?);
    }
    let n_max = *plan.n_m.iter().max().expect("validated: M >= 1");
    let se = se_table(&stats, system, n_max)?;
    let (total_rate, overhead_time) = combine_rate(&se, plan, &system.frame);
    Ok(RateReport {
        se,
        total_rate,
        overhead_time,
    })
}

/// Per-`T_l` spectral-efficiency profile reused across plans.
///
/// The aging coefficient enters the SINR only as the multiplier
/// `rho_{k,n}^2`, so one pass computes a per-user amplitude and the whole
/// `se[k][n-1]` table for every aging index up to the subframe length.
#[derive(Debug)]
struct SeProfile {
    /// `prefix[j] = sum_{n<=j} sum_k SE_{k,n}` for `j = 0..=N`.
    prefix: Vec<f64>,
}

/// Fast plan evaluator with a per-`T_l` memo.
///
/// The per-user statistics are built through a Cholesky factorization of
/// `D = R_hat + I/gamma_e` (`C_h = (L^{-1} R_hat)^H (L^{-1} R_hat)`) instead
/// of the eigendecomposition route of [`mmse_stats`]; the two agree to
/// round-off, and the schedule search re-evaluates its winner with
/// [`frame_rate`] so reported rates come from the reference route. Assumes
/// plans respect the minimum sensing duration: the PSD check that
/// [`frame_rate`] performs is skipped here for speed.
#[derive(Debug)]
pub struct SubframeEvaluator {
    system: SystemModel,
    profiles: RefCell<HashMap<u64, Rc<SeProfile>>>,
}

impl SubframeEvaluator {
    /// Memo entries are never evicted, so unbounded probe streams (long
    /// baseline sweeps) must stop inserting once the map is this large.
    const MEMO_CAP: usize = 1 << 17;

    /// Validates the system once and prepares an empty memo.
    pub fn new(system: SystemModel) -> Result<Self> {
        system.validate()?;
        Ok(Self {
            system,
            profiles: RefCell::new(HashMap::new()),
        })
    }

    /// The shared system description.
    pub fn system(&self) -> &SystemModel {
        &self.system
    }

    fn profile(&self, t_l: f64) -> Result<Rc<SeProfile>> {
        if let Some(p) = self.profiles.borrow().get(&t_l.to_bits()) {
            return Ok(Rc::clone(p));
        }
        let system = &self.system;
        let count = system.users.len();
        let x = 1.0 / system.pilot.gamma_e;
        let mut c_h = Vec::with_capacity(count);
        for user in &system.users {
            let r_hat = user.large.raw_effective_at(t_l);
            let chol = r_hat.add_scaled_identity(x).cholesky()?;
            let half = chol.forward_substitute(&r_hat);
            c_h.push(gram(&half, r_hat.dim()));
        }
        let traces: Vec<f64> = c_h.iter().map(|m| m.trace()).collect();
        if let Some(i) = traces.iter().position(|&t| !(t > 0.0)) {
            return Err(Error::Domain(format!(
                "user {i} has zero estimate-covariance trace; its beam is undefined"
            )));
        }
        let n_max = system.frame.n_blocks;
        let mut se = Vec::with_capacity(count);
        for (k, user) in system.users.iter().enumerate() {
            let beta_k = user.large.beta;
            let spatial_k = user.large.spatial.matrix();
            let mut denom = system.sigma_c2;
            for i in 0..count {
                denom += beta_k * system.powers[i] * spatial_k.product_trace(&c_h[i]) / traces[i];
            }
            let amplitude = system.powers[k] * traces[k] / denom;
            let mut row = Vec::with_capacity(n_max as usize);
            for n in 1..=n_max {
                let rho = temporal_coeff(&user.temporal, n);
                row.push(spectral_efficiency(rho * rho * amplitude)?);
            }
            se.push(row);
        }
        let profile = Rc::new(SeProfile {
            prefix: se_prefix(&se, n_max as usize),
        });
        let mut memo = self.profiles.borrow_mut();
        if memo.len() < Self::MEMO_CAP {
            memo.insert(t_l.to_bits(), Rc::clone(&profile));
        }
        Ok(profile)
    }

    /// Total subframe rate of a plan (fast path).
    pub fn evaluate(&self, plan: &FramePlan) -> Result<f64> {
        plan.validate(&self.system.frame)?;
        let profile = self.profile(plan.t_l)?;
        let (total, _) = combine_prefix(&profile.prefix, plan, &self.system.frame);
        Ok(total)
    }

    /// Reference-route evaluation of a plan (see [`frame_rate`]).
    pub fn report(&self, plan: &FramePlan) -> Result<RateReport> {
        frame_rate(plan, &self.system)
    }
}
