//! Differential geometry of `E3 x SO(3)` in Euler-angle coordinates.
//!
//! The orientation chart is the z-y-z convention: `alpha` and `beta` are the
//! azimuthal and polar angles of the body axis `zeta`, `gamma` is the rotation
//! about `zeta` after the boost. `gamma` lives on `[0, 4*pi)` so that
//! half-integer spin phases stay single-valued on the double cover.

mod grid;
mod metric;
mod spectral;

pub use grid::{gauss_legendre, GammaPeriod, GridSpec, So3Grid};
pub use metric::{
    christoffel_symbols, metric_at, riemann_scalar_curvature, ChristoffelSymbols, MetricAtPoint,
};
pub use spectral::{gamma_derivative, AngularAxis, Harmonics, SpectralPlan};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler angles `(alpha, beta, gamma)` in radians, z-y-z convention.
///
/// `alpha` is reduced to `[0, 2*pi)`, `gamma` to `[0, 4*pi)`; `beta` must lie
/// in the closed interval `[0, pi]`. Winding counts along paths are tracked
/// separately by the path types that need them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    /// Builds angles, reducing `alpha` and `gamma` into their ranges.
    ///
    /// Panics if `beta` is outside `[0, pi]`; use [`EulerAngles::try_new`] for
    /// validated input.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        assert!(
            (0.0..=PI).contains(&beta),
            "beta = {beta} outside [0, pi]"
        );
        Self {
            alpha: alpha.rem_euclid(2.0 * PI),
            beta,
            gamma: gamma.rem_euclid(4.0 * PI),
        }
    }

    pub fn try_new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !beta.is_finite() || !(0.0..=PI).contains(&beta) {
            return Err(Error::InvalidAngles {
                reason: format!("beta = {beta} outside [0, pi]"),
            });
        }
        if !alpha.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidAngles {
                reason: format!("alpha = {alpha}, gamma = {gamma} must be finite"),
            });
        }
        Ok(Self::new(alpha, beta, gamma))
    }

    pub fn zero() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    /// True when `sin(beta)` vanishes and the chart degenerates.
    pub fn is_chart_singular(&self) -> bool {
        self.beta.sin().abs() < 1e-12
    }
}

/// A particle's configuration: position in `E3` plus frame orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfiguration {
    /// Position `r = (x, y, z)`.
    pub position: [f64; 3],
    /// Frame orientation.
    pub orientation: EulerAngles,
}

impl FrameConfiguration {
    pub fn new(position: [f64; 3], orientation: EulerAngles) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn at_origin(orientation: EulerAngles) -> Self {
        Self::new([0.0; 3], orientation)
    }
}
