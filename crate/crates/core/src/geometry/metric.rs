//! Metric tensor, Christoffel symbols and scalar curvature of `E3 x SO(3)`.
//!
//! Coordinates are ordered `q = (x, y, z, alpha, beta, gamma)`. The kinetic
//! energy `m v^2 / 2 + I omega^2 / 2` with `I = m a^2` induces the block
//! metric `g = diag(1_3, a^2 Gamma_3)` with
//! `Gamma_3 = [[1, 0, cos beta], [0, 1, 0], [cos beta, 0, 1]]`.
//! Angles are stored unscaled; the factor `a^2` lives in the angular block.

use nalgebra::Matrix6;

use super::EulerAngles;
use crate::error::{Error, Result};
use crate::params::{PhysicalParameters, DIMENSION};

/// Threshold on `|sin(beta)|` below which the chart counts as singular.
const SINGULAR_SIN_BETA: f64 = 1e-12;

/// The metric evaluated at one point of the chart.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    /// Covariant metric `g_ij`.
    pub g: Matrix6<f64>,
    /// Contravariant metric `g^ij`; `None` at chart singularities.
    pub g_inv: Option<Matrix6<f64>>,
    /// `sqrt(det g) = a^3 |sin beta|`.
    pub sqrt_det_g: f64,
}

impl MetricAtPoint {
    pub fn is_singular(&self) -> bool {
        self.g_inv.is_none()
    }

    /// `det g = a^6 sin^2 beta`.
    pub fn det(&self) -> f64 {
        self.sqrt_det_g * self.sqrt_det_g
    }
}

/// Evaluates the block metric at the given orientation.
///
/// Total on `beta` in `[0, pi]`; at the poles the returned value flags the
/// singularity (`g_inv = None`, `det = 0`) and operations that need the
/// inverse must reject the point.
pub fn metric_at(angles: &EulerAngles, params: &PhysicalParameters) -> MetricAtPoint {
    let a2 = params.giration_radius * params.giration_radius;
    let (sin_b, cos_b) = angles.beta.sin_cos();

    let mut g = Matrix6::zeros();
    for i in 0..3 {
        g[(i, i)] = 1.0;
    }
    g[(3, 3)] = a2;
    g[(4, 4)] = a2;
    g[(5, 5)] = a2;
    g[(3, 5)] = a2 * cos_b;
    g[(5, 3)] = a2 * cos_b;

    let sqrt_det_g = params.giration_radius.powi(3) * sin_b.abs();

    let g_inv = if sin_b.abs() < SINGULAR_SIN_BETA {
        None
    } else {
        let s2 = sin_b * sin_b;
        let mut inv = Matrix6::zeros();
        for i in 0..3 {
            inv[(i, i)] = 1.0;
        }
        inv[(3, 3)] = 1.0 / (a2 * s2);
        inv[(4, 4)] = 1.0 / a2;
        inv[(5, 5)] = 1.0 / (a2 * s2);
        inv[(3, 5)] = -cos_b / (a2 * s2);
        inv[(5, 3)] = -cos_b / (a2 * s2);
        Some(inv)
    };

    MetricAtPoint {
        g,
        g_inv,
        sqrt_det_g,
    }
}

/// Christoffel symbols of the second kind, `Gamma^i_{jk}`, at one point.
#[derive(Debug, Clone)]
pub struct ChristoffelSymbols {
    /// `values[i][j][k] = Gamma^i_{jk}`.
    pub values: [[[f64; DIMENSION]; DIMENSION]; DIMENSION],
}

impl ChristoffelSymbols {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[i][j][k]
    }
}

/// Analytic Christoffel symbols of `E3 x SO(3)`.
///
/// The flat spatial block contributes nothing; only the mixed angular entries
/// built from `g_{alpha gamma} = a^2 cos(beta)` survive, and the overall `a^2`
/// cancels between `g^{-1}` and the metric derivative.
pub fn christoffel_symbols(
    angles: &EulerAngles,
    _params: &PhysicalParameters,
) -> Result<ChristoffelSymbols> {
    let (sin_b, cos_b) = angles.beta.sin_cos();
    if sin_b.abs() < SINGULAR_SIN_BETA {
        return Err(Error::Singularity { beta: angles.beta });
    }

    // Index convention: 3 = alpha, 4 = beta, 5 = gamma.
    let mut v = [[[0.0; DIMENSION]; DIMENSION]; DIMENSION];
    let half_cot = cos_b / (2.0 * sin_b);
    let inv_2s = 1.0 / (2.0 * sin_b);

    v[3][3][4] = half_cot;
    v[3][4][3] = half_cot;
    v[3][4][5] = -inv_2s;
    v[3][5][4] = -inv_2s;
    v[4][3][5] = sin_b / 2.0;
    v[4][5][3] = sin_b / 2.0;
    v[5][3][4] = -inv_2s;
    v[5][4][3] = -inv_2s;
    v[5][4][5] = half_cot;
    v[5][5][4] = half_cot;

    Ok(ChristoffelSymbols { values: v })
}

/// Beta-derivatives of the Christoffel symbols (all other partials vanish).
fn christoffel_beta_derivatives(beta: f64) -> [[[f64; DIMENSION]; DIMENSION]; DIMENSION] {
    let (sin_b, cos_b) = beta.sin_cos();
    let s2 = sin_b * sin_b;
    let mut v = [[[0.0; DIMENSION]; DIMENSION]; DIMENSION];

    // d/dbeta of cos/(2 sin) = -1/(2 sin^2); of -1/(2 sin) = cos/(2 sin^2);
    // of sin/2 = cos/2.
    let d_half_cot = -1.0 / (2.0 * s2);
    let d_inv_2s = cos_b / (2.0 * s2);

    v[3][3][4] = d_half_cot;
    v[3][4][3] = d_half_cot;
    v[3][4][5] = d_inv_2s;
    v[3][5][4] = d_inv_2s;
    v[4][3][5] = cos_b / 2.0;
    v[4][5][3] = cos_b / 2.0;
    v[5][3][4] = d_inv_2s;
    v[5][4][3] = d_inv_2s;
    v[5][4][5] = d_half_cot;
    v[5][5][4] = d_half_cot;

    v
}

/// Riemann scalar curvature of the full 6-D metric by the standard
/// contraction `R = g^{jk} R_jk`, with
/// `R_jk = d_i Gamma^i_{jk} - d_j Gamma^i_{ik} + Gamma^i_{ip} Gamma^p_{jk} - Gamma^i_{jp} Gamma^p_{ik}`.
///
/// Constant over the group: equals `3 / (2 a^2)`.
pub fn riemann_scalar_curvature(
    angles: &EulerAngles,
    params: &PhysicalParameters,
) -> Result<f64> {
    let gamma = christoffel_symbols(angles, params)?.values;
    // Only the beta-derivative (index 4) of any symbol is nonzero.
    let dgamma = christoffel_beta_derivatives(angles.beta);

    let metric = metric_at(angles, params);
    let g_inv = metric
        .g_inv
        .ok_or(Error::Singularity { beta: angles.beta })?;

    let n = DIMENSION;
    let mut ricci = [[0.0; DIMENSION]; DIMENSION];
    for j in 0..n {
        for k in 0..n {
            let mut r = 0.0;
            // d_i Gamma^i_{jk}: only i = 4 contributes.
            r += dgamma[4][j][k];
            // -d_j Gamma^i_{ik}: only j = 4 contributes.
            if j == 4 {
                for i in 0..n {
                    r -= dgamma[i][i][k];
                }
            }
            for i in 0..n {
                for p in 0..n {
                    r += gamma[i][i][p] * gamma[p][j][k] - gamma[i][j][p] * gamma[p][i][k];
                }
            }
            ricci[j][k] = r;
        }
    }

    let mut scalar = 0.0;
    for j in 0..n {
        for k in 0..n {
            scalar += g_inv[(j, k)] * ricci[j][k];
        }
    }
    Ok(scalar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn natural() -> PhysicalParameters {
        PhysicalParameters::natural()
    }

    #[test]
    fn angular_block_is_identity_at_equator() {
        // cos(pi/2) = 0 kills the off-diagonal entry.
        let m = metric_at(&EulerAngles::new(0.3, PI / 2.0, 1.0), &natural());
        for i in 3..6 {
            for j in 3..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m.g[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn determinant_vanishes_at_pole() {
        let m = metric_at(&EulerAngles::new(0.0, 0.0, 0.0), &natural());
        assert_eq!(m.det(), 0.0);
        assert!(m.is_singular());
    }

    #[test]
    fn off_diagonal_and_det_at_pi_over_3() {
        let params = natural();
        let m = metric_at(&EulerAngles::new(0.0, PI / 3.0, 0.0), &params);
        assert!((m.g[(3, 5)] - 0.5).abs() < 1e-15);
        // det(Gamma_3) = sin^2 beta = 3/4.
        assert!((m.det() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn metric_times_inverse_is_identity() {
        let params = PhysicalParameters::new(1.0, 1.7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let angles = EulerAngles::new(
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.05..PI - 0.05),
                rng.random_range(0.0..4.0 * PI),
            );
            let m = metric_at(&angles, &params);
            let prod = m.g * m.g_inv.unwrap();
            let dev = (prod - Matrix6::identity()).abs().max();
            assert!(dev < 1e-12, "g g_inv deviates by {dev}");
        }
    }

    #[test]
    fn det_matches_a6_sin_sq() {
        let params = PhysicalParameters::new(2.0, 1.3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a6 = params.giration_radius.powi(6);
        for _ in 0..50 {
            let beta = rng.random_range(0.01..PI - 0.01);
            let m = metric_at(&EulerAngles::new(0.0, beta, 0.0), &params);
            assert!((m.det() - a6 * beta.sin().powi(2)).abs() < 1e-12 * a6);
        }
    }

    #[test]
    fn spatial_christoffel_block_vanishes() {
        let c = christoffel_symbols(&EulerAngles::new(0.1, 1.1, 0.2), &natural()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    if i < 3 || (j < 3 && k < 3) {
                        assert_eq!(c.get(i, j, k), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_symmetric_in_lower_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let angles = EulerAngles::new(
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.05..PI - 0.05),
                rng.random_range(0.0..4.0 * PI),
            );
            let c = christoffel_symbols(&angles, &natural()).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        assert_eq!(c.get(i, j, k), c.get(i, k, j));
                    }
                }
            }
        }
    }

    /// Central-difference oracle: Gamma^i_{jk} = g^{il} (d_j g_lk + d_k g_lj - d_l g_jk) / 2
    /// with metric derivatives from central differences of `metric_at`.
    fn christoffel_fd_oracle(
        angles: &EulerAngles,
        params: &PhysicalParameters,
    ) -> [[[f64; 6]; 6]; 6] {
        let h = 1e-6;
        let mut dg = [[[0.0; 6]; 6]; 6]; // dg[l][j][k] = d_l g_jk
        for l in 0..6 {
            let mut plus = *angles;
            let mut minus = *angles;
            match l {
                3 => {
                    plus.alpha += h;
                    minus.alpha -= h;
                }
                4 => {
                    plus.beta += h;
                    minus.beta -= h;
                }
                5 => {
                    plus.gamma += h;
                    minus.gamma -= h;
                }
                _ => {}
            }
            let gp = metric_at(&plus, params).g;
            let gm = metric_at(&minus, params).g;
            for j in 0..6 {
                for k in 0..6 {
                    dg[l][j][k] = (gp[(j, k)] - gm[(j, k)]) / (2.0 * h);
                }
            }
        }
        let ginv = metric_at(angles, params).g_inv.unwrap();
        let mut out = [[[0.0; 6]; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    let mut s = 0.0;
                    for l in 0..6 {
                        s += ginv[(i, l)] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
                    }
                    out[i][j][k] = 0.5 * s;
                }
            }
        }
        out
    }

    #[test]
    fn christoffel_matches_finite_difference_oracle() {
        let params = PhysicalParameters::new(1.0, 2.0, 1.0).unwrap();
        for &beta in &[PI / 2.0, 0.7, 2.3] {
            let angles = EulerAngles::new(1.0, beta, 2.0);
            let oracle = christoffel_fd_oracle(&angles, &params);
            let ours = christoffel_symbols(&angles, &params).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    for k in 0..6 {
                        assert!(
                            (ours.get(i, j, k) - oracle[i][j][k]).abs() < 1e-8,
                            "Gamma^{i}_{{{j}{k}}} mismatch at beta = {beta}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_values_at_equator() {
        let c = christoffel_symbols(&EulerAngles::new(0.0, PI / 2.0, 0.0), &natural()).unwrap();
        assert!((c.get(3, 3, 4)).abs() < 1e-15); // cot term vanishes
        assert!((c.get(3, 4, 5) + 0.5).abs() < 1e-15);
        assert!((c.get(4, 3, 5) - 0.5).abs() < 1e-15);
        assert!((c.get(5, 3, 4) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_points_are_rejected() {
        assert!(matches!(
            christoffel_symbols(&EulerAngles::new(0.0, 0.0, 0.0), &natural()),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(
            riemann_scalar_curvature(&EulerAngles::new(0.0, PI, 0.0), &natural()),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn scalar_curvature_is_three_over_two_a_sq() {
        let p1 = natural();
        let r = riemann_scalar_curvature(&EulerAngles::new(0.4, 1.2, 2.2), &p1).unwrap();
        assert!((r - 1.5).abs() < 1e-10, "R = {r}");

        let p2 = PhysicalParameters::new(1.0, 2.0, 1.0).unwrap();
        let r2 = riemann_scalar_curvature(&EulerAngles::new(0.4, 1.2, 2.2), &p2).unwrap();
        assert!((r2 - 0.375).abs() < 1e-10, "R = {r2}");
    }

    #[test]
    fn scalar_curvature_constant_over_random_points() {
        let params = natural();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let angles = EulerAngles::new(
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.1..PI - 0.1),
                rng.random_range(0.0..4.0 * PI),
            );
            let r = riemann_scalar_curvature(&angles, &params).unwrap();
            assert!((r - 1.5).abs() < 1e-8);
        }
    }
}
