//! Nodal tables of `d^j_{mk}` profiles for harmonic transforms on SO(3).
//!
//! The spectral machinery needs `d^j_{mk}(beta_q)` for every sector `(m, k)`
//! and all `j` up to the grid band limit, which can exceed the comfortable
//! range of the alternating explicit sum. For fixed `(m, k)` the functions
//! obey the Jacobi-type three-term recurrence in `j`
//!
//! ```text
//! j sqrt((j+1)^2 - m^2) sqrt((j+1)^2 - k^2) d^{j+1}
//!     = (2j+1) (j (j+1) x - m k) d^j
//!       - (j+1) sqrt(j^2 - m^2) sqrt(j^2 - k^2) d^{j-1},   x = cos(beta)
//! ```
//!
//! which is stable upward (Legendre-like). The two lowest rows are seeded from
//! the explicit sum, where it has only a couple of terms and no cancellation.

use ndarray::Array2;

use super::d_element;

/// Smallest `2j` carrying the sector `(2m, 2k)`.
pub fn two_j_min(two_m: i32, two_k: i32) -> i32 {
    two_m.abs().max(two_k.abs())
}

/// Ladder coefficient `sqrt(j(j+1) - k(k+1))` in doubled arguments.
pub fn ladder_up(two_j: i32, two_k: i32) -> f64 {
    let j = two_j as f64 / 2.0;
    let k = two_k as f64 / 2.0;
    (j * (j + 1.0) - k * (k + 1.0)).max(0.0).sqrt()
}

/// Ladder coefficient `sqrt(j(j+1) - k(k-1))` in doubled arguments.
pub fn ladder_down(two_j: i32, two_k: i32) -> f64 {
    let j = two_j as f64 / 2.0;
    let k = two_k as f64 / 2.0;
    (j * (j + 1.0) - k * (k - 1.0)).max(0.0).sqrt()
}

/// Table of `d^j_{mk}(beta_q)` for `j = j_min, j_min+1, ..., j_max` (rows) at
/// the given `beta` nodes (columns). Empty when `two_j_max < two_j_min`.
pub fn d_profile_table(two_m: i32, two_k: i32, two_j_max: i32, betas: &[f64]) -> Array2<f64> {
    let two_j_lo = two_j_min(two_m, two_k);
    if two_j_max < two_j_lo {
        return Array2::zeros((0, betas.len()));
    }
    debug_assert!((two_j_max - two_j_lo) % 2 == 0);
    let n_j = ((two_j_max - two_j_lo) / 2 + 1) as usize;
    let n_b = betas.len();
    let mut table = Array2::zeros((n_j, n_b));

    for (q, &beta) in betas.iter().enumerate() {
        table[(0, q)] = d_element(two_j_lo, two_m, two_k, beta);
    }
    if n_j > 1 {
        for (q, &beta) in betas.iter().enumerate() {
            table[(1, q)] = d_element(two_j_lo + 2, two_m, two_k, beta);
        }
    }

    let m = two_m as f64 / 2.0;
    let k = two_k as f64 / 2.0;
    for row in 2..n_j {
        // Step from j (= row-1 entry) to j+1 (= row entry).
        let j = (two_j_lo as f64) / 2.0 + (row as f64 - 1.0);
        let jp = j + 1.0;
        let c_next = j * (jp * jp - m * m).sqrt() * (jp * jp - k * k).sqrt();
        let c_prev = jp * (j * j - m * m).sqrt() * (j * j - k * k).sqrt();
        for (q, &beta) in betas.iter().enumerate() {
            let x = beta.cos();
            let num = (2.0 * j + 1.0) * (j * jp * x - m * k) * table[(row - 1, q)]
                - c_prev * table[(row - 2, q)];
            table[(row, q)] = num / c_next;
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn recurrence_agrees_with_explicit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let betas: Vec<f64> = (0..7).map(|_| rng.random_range(0.05..PI - 0.05)).collect();
        for parity in [0, 1] {
            for two_m in (-6..=6).filter(|m| (m - parity) % 2 == 0) {
                for two_k in (-6..=6).filter(|k| (k - parity) % 2 == 0) {
                    let two_j_max = 16 + parity;
                    let tab = d_profile_table(two_m, two_k, two_j_max, &betas);
                    let two_j_lo = two_j_min(two_m, two_k);
                    for row in 0..tab.nrows() {
                        let two_j = two_j_lo + 2 * row as i32;
                        if two_j > 20 {
                            continue; // explicit sum reference capped
                        }
                        for (q, &beta) in betas.iter().enumerate() {
                            let reference = d_element(two_j, two_m, two_k, beta);
                            assert!(
                                (tab[(row, q)] - reference).abs() < 1e-11,
                                "2j={two_j} 2m={two_m} 2k={two_k} beta={beta}: {} vs {}",
                                tab[(row, q)],
                                reference
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn legendre_sector_reproduces_polynomials() {
        let betas = [0.3, 1.0, 2.0, 2.8];
        let tab = d_profile_table(0, 0, 8, &betas);
        for (q, &beta) in betas.iter().enumerate() {
            let x = beta.cos();
            assert!((tab[(0, q)] - 1.0).abs() < 1e-14);
            assert!((tab[(1, q)] - x).abs() < 1e-14);
            assert!((tab[(2, q)] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-13);
            assert!((tab[(4, q)] - 0.125 * (35.0 * x.powi(4) - 30.0 * x * x + 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn ladder_coefficients_vanish_at_band_edge() {
        assert_eq!(ladder_up(4, 4), 0.0); // j = 2, k = 2
        assert_eq!(ladder_down(4, -4), 0.0); // j = 2, k = -2
        assert!((ladder_up(2, 0) - (2.0f64).sqrt()).abs() < 1e-15); // j = 1, k = 0
    }

    #[test]
    fn half_integer_sector_seeds_correctly() {
        // (m, k) = (1/2, 1/2): d^{1/2} = cos(beta/2), d^{3/2} = (3cos(beta)-1)/2 * cos(beta/2)
        let betas = [0.4, 1.5, 2.6];
        let tab = d_profile_table(1, 1, 5, &betas);
        for (q, &beta) in betas.iter().enumerate() {
            let c = (beta / 2.0).cos();
            assert!((tab[(0, q)] - c).abs() < 1e-14);
            let expect = 0.5 * (3.0 * beta.cos() - 1.0) * c;
            assert!((tab[(1, q)] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn stable_at_large_j() {
        // Against orthonormality: sum_j (2j+1)/2 * int d^j_{mk}^2 sin(beta) d(beta) = per-j weight 1.
        // Use Gauss-Legendre in x to integrate each row's square exactly.
        let n = 40;
        let (x, w) = crate::geometry::gauss_legendre(n);
        let betas: Vec<f64> = x.iter().map(|&xi| xi.acos()).collect();
        let tab = d_profile_table(2, 0, 60, &betas);
        for row in 0..tab.nrows() {
            let two_j = 2 + 2 * row as i32;
            if two_j > 2 * (n as i32) - 2 {
                break;
            }
            let j = two_j as f64 / 2.0;
            let integral: f64 = (0..n).map(|q| w[q] * tab[(row, q)] * tab[(row, q)]).sum();
            assert!(
                (integral - 2.0 / (2.0 * j + 1.0)).abs() < 1e-10,
                "2j = {two_j}: norm {} vs {}",
                integral,
                2.0 / (2.0 * j + 1.0)
            );
        }
    }
}
