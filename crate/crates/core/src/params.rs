//! Physical parameters of the spinning particle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension of the configuration space `E3 x SO(3)`.
pub const DIMENSION: usize = 6;

/// Mass, giration radius and hbar, plus the derived constants that appear in
/// the equations of motion.
///
/// The coordinates are `q = (x, y, z, a*alpha, a*beta, a*gamma)`; angles are
/// stored unscaled and the factor `a^2` is folded into the angular metric
/// block, which is algebraically identical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParameters {
    /// Particle mass `m > 0`.
    pub mass: f64,
    /// Giration radius `a > 0`; the inertia momentum is `I = m a^2`.
    pub giration_radius: f64,
    /// Reduced Planck constant.
    pub hbar: f64,
}

impl PhysicalParameters {
    pub fn new(mass: f64, giration_radius: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0) || !(giration_radius > 0.0) || !(hbar > 0.0) {
            return Err(Error::InvalidParameters {
                reason: format!(
                    "mass = {mass}, giration_radius = {giration_radius}, hbar = {hbar}; all must be > 0"
                ),
            });
        }
        Ok(Self {
            mass,
            giration_radius,
            hbar,
        })
    }

    /// Natural units: `m = a = hbar = 1`.
    pub fn natural() -> Self {
        Self {
            mass: 1.0,
            giration_radius: 1.0,
            hbar: 1.0,
        }
    }

    /// Inertia momentum `I = m a^2`.
    pub fn inertia(&self) -> f64 {
        self.mass * self.giration_radius * self.giration_radius
    }

    /// Number of coordinates, `n = 6`.
    pub fn dimension_count(&self) -> usize {
        DIMENSION
    }

    /// Conformal coupling `xi^2 = (n - 2) / (4 (n - 1))`, exactly `1/5` for `n = 6`.
    pub fn weyl_xi_sq(&self) -> f64 {
        let n = DIMENSION as f64;
        (n - 2.0) / (4.0 * (n - 1.0))
    }

    /// Constant Riemann scalar curvature of `E3 x SO(3)`, `3 / (2 a^2)`.
    pub fn riemann_curvature(&self) -> f64 {
        1.5 / (self.giration_radius * self.giration_radius)
    }
}

impl Default for PhysicalParameters {
    fn default() -> Self {
        Self::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_sq_is_exactly_one_fifth() {
        let p = PhysicalParameters::natural();
        assert_eq!(p.weyl_xi_sq(), 0.2);
        assert_eq!(p.dimension_count(), 6);
    }

    #[test]
    fn inertia_is_m_a_sq() {
        let p = PhysicalParameters::new(2.0, 3.0, 1.0).unwrap();
        assert_eq!(p.inertia(), 18.0);
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(PhysicalParameters::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParameters::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalParameters::new(1.0, 1.0, f64::NAN).is_err());
    }
}
