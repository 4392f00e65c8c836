//! Scenario files: the JSON configuration surface of the binary.
//!
//! A scenario file describes one system in engineering units (angles in
//! degrees, transmit power in dBm, durations as symbol counts, accuracy
//! targets in squared degrees). This module parses that surface, applies
//! defaults for every omitted key — an empty object `{}` is the documented
//! default scenario — and converts everything to the linear, radian-based
//! internal units used by the library ([`Scenario`]). Derived quantities
//! such as the block duration `T_b = M_b * T_s` are computed on demand and
//! never stored, so they cannot drift out of sync.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::channel::{TemporalModel, UserGeometry};
use crate::estimation::PilotConfig;
use crate::rate::{FrameConfig, SystemModel, UserLink};
use crate::sensing::{SensingScene, UserLargeScale};
use crate::{Error, Result};

/// Converts a power in dBm to linear milliwatts: `10^(dbm/10)`.
pub fn dbm_to_milliwatts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts a power in linear milliwatts to dBm: `10 log10(mw)`.
pub fn milliwatts_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Converts a squared angle from deg^2 to rad^2.
pub fn deg2_to_rad2(deg2: f64) -> f64 {
    let s = PI / 180.0;
    deg2 * s * s
}

/// One user in internal units (radians, linear gains).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioUser {
    /// Angle of departure/arrival in radians.
    pub theta: f64,
    /// Angular half-spread of the scattering cluster in radians.
    pub delta_theta: f64,
    /// Large-scale channel gain (linear).
    pub beta: f64,
    /// Squared magnitude of the radar reflection coefficient (linear).
    pub alpha_mag2: f64,
    /// Aging model for this user.
    pub temporal: TemporalModel,
}

/// A fully resolved scenario in internal units.
///
/// Angles are radians, powers are linear milliwatts, accuracy targets are
/// rad^2, durations are microseconds. [`Scenario::default`] is the scenario
/// an empty configuration object resolves to.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Transmit array size.
    pub l_t: usize,
    /// Receive (radar) array size.
    pub l_r: usize,
    /// Users, in file order.
    pub users: Vec<ScenarioUser>,
    /// Total downlink transmit power (linear mW).
    pub p_t: f64,
    /// Per-user pilot power (linear mW).
    pub p_m: f64,
    /// Radar measurement noise variance.
    pub sigma_r2: f64,
    /// Pilot noise variance.
    pub sigma_m2: f64,
    /// Data noise variance.
    pub sigma_c2: f64,
    /// Symbol duration in microseconds.
    pub t_s: f64,
    /// Symbols per block.
    pub m_b: u32,
    /// Pilot symbols per small-scale update.
    pub m_m: u32,
    /// Blocks per subframe.
    pub n_blocks: u32,
    /// Radar processing gain.
    pub g: f64,
    /// Per-user sensing accuracy targets in rad^2.
    pub gammas: Vec<f64>,
    /// Gauss-Legendre order for spatial-correlation integrals.
    pub quad_order: usize,
    /// Base seed for all randomized procedures.
    pub seed: u64,
}

impl Scenario {
    /// Block duration `T_b = M_b * T_s` in microseconds.
    pub fn t_b(&self) -> f64 {
        self.m_b as f64 * self.t_s
    }

    /// Pilot burst duration `T_m = M_m * T_s` in microseconds.
    pub fn t_m(&self) -> f64 {
        self.m_m as f64 * self.t_s
    }

    /// Subframe duration `N * T_b` in microseconds — the sensing budget.
    pub fn budget(&self) -> f64 {
        self.n_blocks as f64 * self.t_b()
    }

    /// Builds the runtime system description: per-user large-scale state
    /// (spatial correlation, CRB coefficient, error direction), pilot
    /// configuration, equal power split, and frame geometry.
    pub fn system(&self) -> Result<SystemModel> {
        let count = self.users.len();
        let mut users = Vec::with_capacity(count);
        for (k, user) in self.users.iter().enumerate() {
            let in_user = |e: Error| Error::Scenario(format!("users[{k}]: {e}"));
            let geom =
                UserGeometry::new(user.theta, user.delta_theta, user.beta).map_err(in_user)?;
            let alpha = Complex64::new(user.alpha_mag2.sqrt(), 0.0);
            let scene =
                SensingScene::new(alpha, self.g, self.l_r, self.sigma_r2).map_err(in_user)?;
            let large = UserLargeScale::derive(&geom, &scene, self.l_t, self.quad_order)
                .map_err(in_user)?;
            users.push(UserLink {
                large,
                temporal: user.temporal,
            });
        }
        let p_k = self.p_t / count as f64;
        let system = SystemModel {
            users,
            pilot: PilotConfig::new(self.m_m, self.p_m, self.sigma_m2)?,
            powers: vec![p_k; count],
            sigma_c2: self.sigma_c2,
            frame: FrameConfig {
                n_blocks: self.n_blocks,
                t_b: self.t_b(),
                t_m: self.t_m(),
            },
        };
        system.validate()?;
        Ok(system)
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::resolve(ScenarioFile::default()).expect("default scenario is valid")
    }
}

// ---------------------------------------------------------------------------
// Raw file surface
// ---------------------------------------------------------------------------

/// Temporal model as written in scenario files.
#[derive(Debug, Clone, Copy, Deserialize)]
enum TemporalFile {
    #[serde(rename = "exponential")]
    Exponential { rho_1: f64 },
    #[serde(rename = "jakes")]
    Jakes {
        #[serde(rename = "f_d_max_Tb")]
        f_d_max_tb: f64,
    },
}

impl From<TemporalFile> for TemporalModel {
    fn from(t: TemporalFile) -> Self {
        match t {
            TemporalFile::Exponential { rho_1 } => TemporalModel::Exponential { rho_1 },
            TemporalFile::Jakes { f_d_max_tb } => TemporalModel::Jakes { f_d_max_tb },
        }
    }
}

/// Accuracy target: one shared value or one value per user (deg^2).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GammaSpec {
    Shared(f64),
    PerUser(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserFile {
    theta_deg: f64,
    #[serde(default = "one")]
    delta_theta_deg: f64,
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "one")]
    alpha_mag2: f64,
    #[serde(default)]
    temporal: Option<TemporalFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(rename = "L_t", default = "default_antennas")]
    l_t: usize,
    #[serde(rename = "L_r", default = "default_antennas")]
    l_r: usize,
    #[serde(default = "default_users")]
    users: Vec<UserFile>,
    #[serde(rename = "P_t_dbm", default = "default_p_t_dbm")]
    p_t_dbm: f64,
    #[serde(rename = "P_m", default)]
    p_m: Option<f64>,
    #[serde(default = "default_sigma_r2")]
    sigma_r2: f64,
    #[serde(default = "one")]
    sigma_m2: f64,
    #[serde(default = "one")]
    sigma_c2: f64,
    #[serde(rename = "T_s_us", default = "one")]
    t_s_us: f64,
    #[serde(rename = "M_b", default = "default_m_b")]
    m_b: u32,
    #[serde(rename = "M_m", default = "default_m_m")]
    m_m: u32,
    #[serde(rename = "N", default = "default_n")]
    n: u32,
    #[serde(rename = "G", default = "default_g")]
    g: f64,
    #[serde(rename = "Gamma_deg2", default = "default_gamma")]
    gamma_deg2: GammaSpec,
    #[serde(default = "default_temporal")]
    temporal: TemporalFile,
    #[serde(default = "default_quad_order")]
    quad_order: usize,
    #[serde(default)]
    seed: u64,
}

fn one() -> f64 {
    1.0
}
fn default_antennas() -> usize {
    8
}
fn default_users() -> Vec<UserFile> {
    [-60.0, -30.0, 0.0, 30.0, 60.0]
        .into_iter()
        .map(|theta_deg| UserFile {
            theta_deg,
            delta_theta_deg: 1.0,
            beta: 1.0,
            alpha_mag2: 1.0,
            temporal: None,
        })
        .collect()
}
fn default_p_t_dbm() -> f64 {
    23.0
}
/// Radar noise level calibrated so that, with the default geometry and
/// accuracy target, the minimum feasible sensing duration lands mid-frame
/// (about 3.5 blocks) — both bounds of the scheduling trade-off are active.
fn default_sigma_r2() -> f64 {
    21886.0
}
fn default_m_b() -> u32 {
    70
}
fn default_m_m() -> u32 {
    9
}
fn default_n() -> u32 {
    35
}
fn default_g() -> f64 {
    1e3
}
fn default_gamma() -> GammaSpec {
    GammaSpec::Shared(0.5)
}
fn default_temporal() -> TemporalFile {
    TemporalFile::Exponential { rho_1: 0.98 }
}
fn default_quad_order() -> usize {
    64
}

impl Default for ScenarioFile {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty object deserializes via field defaults")
    }
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

fn require(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Scenario(message()))
    }
}

impl Scenario {
    fn resolve(file: ScenarioFile) -> Result<Scenario> {
        require(file.l_t >= 1, || {
            format!("L_t must be >= 1, got {}", file.l_t)
        })?;
        require(file.l_r >= 1, || {
            format!("L_r must be >= 1, got {}", file.l_r)
        })?;
        require(!file.users.is_empty(), || "users must be non-empty".into())?;
        require(file.p_t_dbm.is_finite(), || {
            format!("P_t_dbm must be finite, got {}", file.p_t_dbm)
        })?;
        require(file.sigma_r2 > 0.0 && file.sigma_r2.is_finite(), || {
            format!("sigma_r2 must be positive, got {}", file.sigma_r2)
        })?;
        require(file.sigma_m2 > 0.0 && file.sigma_m2.is_finite(), || {
            format!("sigma_m2 must be positive, got {}", file.sigma_m2)
        })?;
        require(file.sigma_c2 > 0.0 && file.sigma_c2.is_finite(), || {
            format!("sigma_c2 must be positive, got {}", file.sigma_c2)
        })?;
        require(file.t_s_us > 0.0 && file.t_s_us.is_finite(), || {
            format!("T_s_us must be positive, got {}", file.t_s_us)
        })?;
        require(file.m_b >= 1, || {
            format!("M_b must be >= 1, got {}", file.m_b)
        })?;
        require(file.m_m >= 1, || {
            format!("M_m must be >= 1, got {}", file.m_m)
        })?;
        require(file.n >= 1, || format!("N must be >= 1, got {}", file.n))?;
        require(file.g > 0.0 && file.g.is_finite(), || {
            format!("G must be positive, got {}", file.g)
        })?;
        require(file.quad_order >= 1, || {
            format!("quad_order must be >= 1, got {}", file.quad_order)
        })?;

        let count = file.users.len();
        let gammas_deg2 = match &file.gamma_deg2 {
            GammaSpec::Shared(g) => vec![*g; count],
            GammaSpec::PerUser(v) => {
                require(v.len() == count, || {
                    format!("Gamma_deg2 lists {} entries for {} users", v.len(), count)
                })?;
                v.clone()
            }
        };
        for (k, &g) in gammas_deg2.iter().enumerate() {
            require(g > 0.0 && g.is_finite(), || {
                format!("Gamma_deg2 for user {k} must be positive, got {g}")
            })?;
        }

        let p_t = dbm_to_milliwatts(file.p_t_dbm);
        let p_m = match file.p_m {
            Some(p) => {
                require(p > 0.0 && p.is_finite(), || {
                    format!("P_m must be positive, got {p}")
                })?;
                p
            }
            None => p_t / count as f64,
        };

        let mut users = Vec::with_capacity(count);
        for (k, u) in file.users.iter().enumerate() {
            require(u.theta_deg.is_finite() && u.theta_deg.abs() < 90.0, || {
                format!(
                    "users[{k}].theta_deg must lie strictly inside (-90, 90), got {}",
                    u.theta_deg
                )
            })?;
            require(
                u.delta_theta_deg > 0.0 && u.delta_theta_deg.is_finite(),
                || {
                    format!(
                        "users[{k}].delta_theta_deg must be positive, got {}",
                        u.delta_theta_deg
                    )
                },
            )?;
            require(u.beta > 0.0 && u.beta.is_finite(), || {
                format!("users[{k}].beta must be positive, got {}", u.beta)
            })?;
            require(u.alpha_mag2 > 0.0 && u.alpha_mag2.is_finite(), || {
                format!(
                    "users[{k}].alpha_mag2 must be positive, got {}",
                    u.alpha_mag2
                )
            })?;
            users.push(ScenarioUser {
                theta: u.theta_deg.to_radians(),
                delta_theta: u.delta_theta_deg.to_radians(),
                beta: u.beta,
                alpha_mag2: u.alpha_mag2,
                temporal: u.temporal.unwrap_or(file.temporal).into(),
            });
        }

        Ok(Scenario {
            l_t: file.l_t,
            l_r: file.l_r,
            users,
            p_t,
            p_m,
            sigma_r2: file.sigma_r2,
            sigma_m2: file.sigma_m2,
            sigma_c2: file.sigma_c2,
            t_s: file.t_s_us,
            m_b: file.m_b,
            m_m: file.m_m,
            n_blocks: file.n,
            g: file.g,
            gammas: gammas_deg2.into_iter().map(deg2_to_rad2).collect(),
            quad_order: file.quad_order,
            seed: file.seed,
        })
    }
}

/// Parses a scenario from JSON text.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| Error::Scenario(format!("invalid scenario: {e}")))?;
    Scenario::resolve(file)
}

/// Reads and parses a scenario file from disk.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    scenario_from_json(&text)
}
