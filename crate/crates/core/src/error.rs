//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by geometry, wavefunction and dynamics operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Euler chart degenerates at beta in {0, pi}: det(g) = 0 there.
    #[error("coordinate singularity at beta = {beta}: sin(beta) = 0, metric not invertible")]
    Singularity { beta: f64 },

    /// Angles outside their admissible ranges.
    #[error("invalid Euler angles: {reason}")]
    InvalidAngles { reason: String },

    /// Invalid physical parameters (must all be positive).
    #[error("invalid physical parameters: {reason}")]
    InvalidParameters { reason: String },

    /// Grid resolution below what an operation supports.
    #[error("grid resolution too low: {detail}")]
    ResolutionTooLow { detail: String },

    /// A field does not live on the grid an operation was given.
    #[error("grid mismatch: {detail}")]
    GridMismatch { detail: String },

    /// Spin projection outside {-s, ..., +s}.
    #[error("projection 2*sigma = {two_sigma} is not a valid projection for 2s = {two_s}")]
    InvalidProjection { two_s: i32, two_sigma: i32 },

    /// Spin larger than the evaluation cap of the Wigner module.
    #[error("spin 2s = {two_s} exceeds the supported cap 2s <= {two_s_max}")]
    SpinTooLarge { two_s: i32, two_s_max: i32 },

    /// Half-integer spin requires the 4*pi gamma cover.
    #[error("gamma-period mismatch: 2s = {two_s} requires the 4*pi cover")]
    PeriodMismatch { two_s: i32 },

    /// Scalar wavefunction carries more than one e^{i s gamma} mode.
    #[error("mixed gamma modes: fraction {off_mode:.3e} of the norm lies outside the e^{{i s gamma}} mode")]
    MixedGammaMode { off_mode: f64 },

    /// Field cannot be normalized (vanishing norm).
    #[error("state is not normalizable (norm = {norm:.3e})")]
    NotNormalizable { norm: f64 },

    /// Phase unwrapping crossed a near-node of |Psi|.
    #[error("phase unwrapping hit a near-zero of |Psi| at node {index:?}: |Psi| = {modulus:.3e} < threshold {threshold:.3e}")]
    NodeCrossing {
        index: (usize, usize, usize),
        modulus: f64,
        threshold: f64,
    },

    /// Density must be strictly positive.
    #[error("nonpositive density: min rho = {min_rho:.3e}")]
    NonpositiveDensity { min_rho: f64 },

    /// State contains harmonic content beyond the configured mode cap.
    #[error("mode cap exceeded: state carries 2j = {two_j} > cap 2j = {two_j_cap}")]
    ModeCapExceeded { two_j: i32, two_j_cap: i32 },

    /// State is not representable in the grid's harmonic band.
    #[error("state not band-limited on this grid: relative remainder {remainder:.3e}")]
    NotBandLimited { remainder: f64 },

    /// An exchange path violating its invariants was supplied.
    #[error("invalid exchange path: {reason}")]
    InvalidPath { reason: String },

    /// Too few refinement levels for a convergence fit.
    #[error("insufficient refinement levels: got {got}, need at least {need}")]
    InsufficientLevels { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
