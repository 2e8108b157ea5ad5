//! Rotational quantum mechanics on the configuration space `E3 x SO(3)`.
//!
//! A particle is described by its position together with the orientation of a
//! body-fixed frame, parameterized by Euler angles `(alpha, beta, gamma)`.
//! This crate provides:
//!
//! - the metric, Christoffel symbols, scalar curvature and Laplace-Beltrami
//!   operator of `E3 x SO(3)` in Euler-angle coordinates ([`geometry`]);
//! - Wigner d- and D-matrices for integer and half-integer spin and the
//!   boost-expansion coefficients `c_sigma(alpha, beta)` ([`wigner`]);
//! - the bidirectional map between multi-component spinor fields and the
//!   single scalar wavefunction `Psi = e^{i s gamma} Phi_s`, with polar
//!   `(rho, S)` extraction ([`wavefunction`]);
//! - Weyl scalar curvature built from the density, Hamilton-Jacobi and
//!   continuity residuals, and spectral free-rotor time evolution
//!   ([`dynamics`]);
//! - two-particle exchange rotations under the monotone-gamma (ratchet)
//!   constraint, the resulting `(-1)^{2s}` exchange phase, and the N-particle
//!   (anti)symmetrizer ([`exchange`]).
//!
//! Everything is desk-scale and deterministic: fixed summation orders, no
//! threading, seeded randomness only in callers.

pub mod error;
pub mod geometry;
pub mod params;
pub mod wigner;
// modules below are added bottom-up during the build
pub mod dynamics;
pub mod exchange;
pub mod wavefunction;

pub use error::{Error, Result};
pub use params::PhysicalParameters;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
