//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by covariance-level and dense-oracle computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not antisymmetric (defect {defect:.3e} > tol {tol:.3e})")]
    NotAntisymmetric { defect: f64, tol: f64 },

    #[error("covariance spectrum out of range (max singular value {max_sv})")]
    SpectrumOutOfRange { max_sv: f64 },

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndexOutOfRange { index: usize, n_modes: usize },

    #[error("subsystem block Gamma_A is singular (min singular value {min_sv:.3e})")]
    SingularGammaA { min_sv: f64 },

    #[error("subsystem block {block} is singular (min singular value {min_sv:.3e})")]
    SingularBlock { block: char, min_sv: f64 },

    #[error("twisted-covariance eigenvalue |lambda| = {lambda_abs} lies on the unit circle (distance {distance:.3e})")]
    UnitCircleEigenvalue { lambda_abs: f64, distance: f64 },

    #[error("ill-conditioned {what} (condition number {cond:.3e} > {limit:.3e})")]
    IllConditioned {
        what: &'static str,
        cond: f64,
        limit: f64,
    },

    #[error(
        "quadrature node k = {k} is near-singular (rcond {rcond:.3e}); retry with a shifted grid"
    )]
    NearSingularNode { k: f64, rcond: f64 },

    #[error("Gaussian channel not applicable: (I + D Gamma) is singular")]
    ChannelInapplicable,

    #[error("Lyapunov equation singular with nonzero Y (min |a_i + a_j| = {min_sum:.3e})")]
    LyapunovSingular { min_sum: f64 },

    #[error(
        "integrator aborted: covariance validity violated at t = {t} (max singular value {max_sv})"
    )]
    IntegratorDiverged { t: f64, max_sv: f64 },

    #[error("{n_modes} modes exceeds the {cap}-mode cap for {what}")]
    SizeCap {
        what: &'static str,
        n_modes: usize,
        cap: usize,
    },

    #[error("area-law certificate diverges: alpha = {alpha} <= (D+1)/2 = {threshold}")]
    DivergentAreaLaw { alpha: f64, threshold: f64 },

    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("linear algebra backend error: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
