// Guards of the form `!(x > 0.0)` are used throughout to reject NaN along
// with the out-of-range values; rewriting them as `x <= 0.0` would silently
// accept NaN. The negated form is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Dual-scale channel estimation and subframe scheduling for
//! sensing-assisted multi-user communication.
//!
//! A base station acquires each user's **large-scale** spatial correlation
//! matrix by radar sensing (angle estimation whose accuracy is limited by the
//! Cramér-Rao bound and improves with sensing duration), then tracks the
//! **small-scale** fading vector with pilot-based MMSE estimation that decays
//! between updates due to channel aging. The achievable downlink rate of a
//! subframe therefore depends on how its blocks are split between sensing,
//! pilots, and data — a schedule described by a [`rate::FramePlan`].
//!
//! The crate provides, bottom-up:
//!
//! * [`numerics`] — self-contained substrate: Hermitian eigendecomposition
//!   and Cholesky factorization, Gauss-Legendre quadrature, a Bessel `J0`,
//!   seeded RNG streams, correlated complex Gaussian sampling, and a robust
//!   1-D maximizer.
//! * [`channel`] — steering vectors, one-ring spatial correlation, temporal
//!   (aging) correlation models, and aged-channel sampling.
//! * [`sensing`] — per-user angle CRB coefficients, the delta-method
//!   large-scale error covariance, the sensing-degraded effective
//!   correlation, and the minimum feasible sensing duration.
//! * [`estimation`] — MMSE estimator statistics under imperfect large-scale
//!   knowledge, with a closed-form trace identity.
//! * [`rate`] — analytical per-block SINR under aged MRT beamforming,
//!   spectral efficiency, and the subframe achievable rate.
//! * [`optimizer`] — the exhaustive two-dimensional schedule search with a
//!   balanced closed-form block partition, plus SSU/FSU/RBA baselines and
//!   brute-force oracles.
//! * [`montecarlo`] — independent stochastic verification of the analytical
//!   SINR, the delta-method covariance, and the aging model.
//! * [`scenario`] / [`cli`] — JSON scenario ingestion and the four
//!   user-facing commands (`optimize`, `sweep`, `validate`, `baselines`).
//!
//! All library angles are radians and all powers linear; the JSON scenario
//! boundary accepts degrees and dBm where noted and converts on load.

pub mod channel;
pub mod cli;
pub mod estimation;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;
pub mod rate;
pub mod scenario;
pub mod sensing;

/// Crate-wide error type.
///
/// Variants are grouped by what the caller can do about them: argument and
/// plan errors indicate misuse, `SensingTooCoarse` / `InfeasibleSensing`
/// are domain conditions the scheduler reasons about, and `Internal` marks
/// broken invariants that should never surface in correct use.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A numeric input was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix required to be positive semidefinite had an eigenvalue below
    /// the clamping tolerance.
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} < -{tolerance:.1e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    /// The array geometry carries no angle information for this user
    /// (the CRB curvature term vanished), so no finite CRB exists.
    #[error(
        "degenerate sensing geometry for user {user}: curvature {curvature:.3e} is not positive"
    )]
    DegenerateGeometry { user: usize, curvature: f64 },

    /// The sensing error was too large for the effective correlation matrix
    /// to remain positive semidefinite.
    #[error("sensing too coarse: effective correlation has min eigenvalue {min_eigenvalue:.3e}")]
    SensingTooCoarse { min_eigenvalue: f64 },

    /// No sensing duration within the subframe satisfies the accuracy and
    /// positive-semidefiniteness constraints.
    #[error("infeasible sensing: user {user} needs T_l >= {t_min:.6} but the subframe only has {budget:.6}")]
    InfeasibleSensing {
        user: usize,
        t_min: f64,
        budget: f64,
    },

    /// A frame plan violated its structural invariants.
    #[error("invalid frame plan: {0}")]
    Plan(String),

    /// A brute-force oracle was asked for a problem above its size limits.
    #[error("refused: {0}")]
    Refusal(String),

    /// An internal invariant failed; indicates a bug, not a caller error.
    #[error("internal error: {0}")]
    Internal(String),

    /// Scenario file I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Scenario file did not parse or failed validation.
    #[error("scenario error: {0}")]
    Scenario(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
