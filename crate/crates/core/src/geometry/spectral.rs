//! Harmonic transforms on [`So3Grid`]: analysis/synthesis in the Wigner
//! D-basis, the Laplace-Beltrami operator and spectral gradients.
//!
//! Fields are expanded as `f = sum A^j_{mk} D^j_{mk}` with
//! `D^j_{mk} = e^{-i m alpha} d^j_{mk}(beta) e^{-i k gamma}`. On the 4*pi
//! cover both integer and half-integer `(j, m, k)` families are present; on
//! the 2*pi chart only the integer family exists. Within the grid's band
//! limit the analysis/synthesis pair is exact: uniform sums in `alpha`,
//! `gamma` and Gauss-Legendre quadrature in `cos(beta)` integrate every
//! product of band-limited harmonics exactly.
//!
//! The Laplace-Beltrami operator of the `a^2 Gamma_3` angular metric is
//! diagonal here: `LB D^j_{mk} = -j(j+1)/a^2 * D^j_{mk}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::{Array1, Array2, Array3};

use super::grid::{GammaPeriod, So3Grid};
use crate::error::{Error, Result};
use crate::params::PhysicalParameters;
use crate::wigner::tables::{d_profile_table, ladder_down, ladder_up, two_j_min};
use crate::C64;

/// Angular coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularAxis {
    Alpha,
    Beta,
    Gamma,
}

/// Harmonic coefficients of a field, grouped by `(2m, 2k)` sector.
#[derive(Debug, Clone)]
pub struct Harmonics {
    /// `(two_m, two_k) -> amplitudes A^j`, indexed by `(two_j - two_j_min)/2`.
    sectors: BTreeMap<(i32, i32), Vec<C64>>,
}

impl Harmonics {
    pub fn empty() -> Self {
        Self {
            sectors: BTreeMap::new(),
        }
    }

    pub fn amp(&self, two_j: i32, two_m: i32, two_k: i32) -> C64 {
        let lo = two_j_min(two_m, two_k);
        if two_j < lo || (two_j - lo) % 2 != 0 {
            return C64::new(0.0, 0.0);
        }
        self.sectors
            .get(&(two_m, two_k))
            .and_then(|v| v.get(((two_j - lo) / 2) as usize))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn set_amp(&mut self, two_j: i32, two_m: i32, two_k: i32, value: C64) {
        let lo = two_j_min(two_m, two_k);
        assert!(two_j >= lo && (two_j - lo) % 2 == 0, "invalid (j, m, k)");
        let idx = ((two_j - lo) / 2) as usize;
        let v = self.sectors.entry((two_m, two_k)).or_default();
        if v.len() <= idx {
            v.resize(idx + 1, C64::new(0.0, 0.0));
        }
        v[idx] = value;
    }

    /// Iterates `(two_j, two_m, two_k, amplitude)` in deterministic order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, i32, C64)> + '_ {
        self.sectors.iter().flat_map(|(&(two_m, two_k), amps)| {
            let lo = two_j_min(two_m, two_k);
            amps.iter()
                .enumerate()
                .map(move |(i, &a)| (lo + 2 * i as i32, two_m, two_k, a))
        })
    }

    /// Largest `2j` whose amplitude exceeds `tol` in modulus; -1 if none.
    pub fn max_two_j(&self, tol: f64) -> i32 {
        self.iter()
            .filter(|(_, _, _, a)| a.norm() > tol)
            .map(|(two_j, _, _, _)| two_j)
            .max()
            .unwrap_or(-1)
    }

    /// Multiplies every amplitude by `factor(two_j)`.
    pub fn scale_per_j(&mut self, factor: impl Fn(i32) -> C64) {
        for (&(two_m, two_k), amps) in self.sectors.iter_mut() {
            let lo = two_j_min(two_m, two_k);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= factor(lo + 2 * i as i32);
            }
        }
    }

    /// Squared Haar norm `sum |A|^2 V/(2j+1)` of the represented field.
    pub fn norm_sq(&self, haar_volume: f64) -> f64 {
        self.iter()
            .map(|(two_j, _, _, a)| a.norm_sqr() * haar_volume / (two_j as f64 + 1.0))
            .sum()
    }
}

/// Precomputed transform plan bound to one grid.
///
/// All tables are built eagerly; the plan is immutable afterwards and safe to
/// share across threads.
#[derive(Debug)]
pub struct SpectralPlan {
    grid: Arc<So3Grid>,
    /// Band limit of the integer-j family (`two_j` even).
    two_j_max_even: i32,
    /// Band limit of the half-integer family; `None` on 2*pi grids.
    two_j_max_odd: Option<i32>,
    /// `(two_m, two_k) -> d^j_{mk}(beta_q)` rows indexed from the sector floor.
    dtab: BTreeMap<(i32, i32), Array2<f64>>,
    /// `two_m -> e^{-i m alpha_ia}`.
    exp_alpha: BTreeMap<i32, Vec<C64>>,
    /// `two_k -> e^{-i k gamma_ic}`.
    exp_gamma: BTreeMap<i32, Vec<C64>>,
}

fn floor_to_parity(x: i32, odd: bool) -> i32 {
    if odd == (x % 2 != 0) {
        x
    } else {
        x - 1
    }
}

impl SpectralPlan {
    pub fn new(grid: Arc<So3Grid>) -> Self {
        let na = grid.n_alpha as i32;
        let nb = grid.n_beta as i32;
        let ng = grid.n_gamma as i32;

        let gamma_cap = match grid.period {
            GammaPeriod::TwoPi => ng - 1,
            GammaPeriod::FourPi => (ng - 1) / 2,
        };
        let two_j_max_even = floor_to_parity((2 * nb - 2).min(na - 1).min(gamma_cap), false).max(0);
        let two_j_max_odd = match grid.period {
            GammaPeriod::TwoPi => None,
            GammaPeriod::FourPi => {
                let cap = floor_to_parity((2 * nb - 1).min(na - 1).min(gamma_cap), true);
                (cap >= 1).then_some(cap)
            }
        };

        let mut dtab = BTreeMap::new();
        let mut exp_alpha = BTreeMap::new();
        let mut exp_gamma = BTreeMap::new();

        let mut families = vec![(two_j_max_even, 0)];
        if let Some(cap) = two_j_max_odd {
            families.push((cap, 1));
        }
        for &(cap, parity) in &families {
            let mut two_m = -cap;
            while two_m <= cap {
                if (two_m.rem_euclid(2)) == parity {
                    let mut two_k = -cap;
                    while two_k <= cap {
                        if (two_k.rem_euclid(2)) == parity {
                            dtab.insert(
                                (two_m, two_k),
                                d_profile_table(two_m, two_k, cap, grid.betas()),
                            );
                        }
                        two_k += 1;
                    }
                    exp_alpha.insert(
                        two_m,
                        grid.alphas()
                            .iter()
                            .map(|&a| C64::from_polar(1.0, -(two_m as f64 / 2.0) * a))
                            .collect(),
                    );
                    exp_gamma.insert(
                        two_m,
                        grid.gammas()
                            .iter()
                            .map(|&g| C64::from_polar(1.0, -(two_m as f64 / 2.0) * g))
                            .collect(),
                    );
                }
                two_m += 1;
            }
        }

        Self {
            grid,
            two_j_max_even,
            two_j_max_odd,
            dtab,
            exp_alpha,
            exp_gamma,
        }
    }

    pub fn grid(&self) -> &Arc<So3Grid> {
        &self.grid
    }

    /// Band limit `2*j_max` of the integer family.
    pub fn two_j_max_even(&self) -> i32 {
        self.two_j_max_even
    }

    /// Band limit `2*j_max` of the half-integer family, if present.
    pub fn two_j_max_odd(&self) -> Option<i32> {
        self.two_j_max_odd
    }

    pub fn two_j_max_for_parity(&self, odd: bool) -> Option<i32> {
        if odd {
            self.two_j_max_odd
        } else {
            Some(self.two_j_max_even)
        }
    }

    fn d_value(&self, two_m: i32, two_k: i32, two_j: i32, q: usize) -> f64 {
        let lo = two_j_min(two_m, two_k);
        if two_j < lo {
            return 0.0;
        }
        match self.dtab.get(&(two_m, two_k)) {
            Some(tab) => {
                let row = ((two_j - lo) / 2) as usize;
                if row < tab.nrows() {
                    tab[(row, q)]
                } else {
                    0.0
                }
            }
            None => 0.0,
        }
    }

    /// Harmonic analysis: quadrature projection onto the D-basis.
    pub fn analyze(&self, field: &Array3<C64>) -> Result<Harmonics> {
        self.grid.check_field(field)?;
        let (na, nb, ng) = self.grid.shape();

        // Stage 1: gamma sums per two_k.
        let mut stage_gamma: BTreeMap<i32, Array2<C64>> = BTreeMap::new();
        for (&two_k, phases) in &self.exp_gamma {
            let mut g1 = Array2::zeros((na, nb));
            for ia in 0..na {
                for ib in 0..nb {
                    let mut acc = C64::new(0.0, 0.0);
                    for ic in 0..ng {
                        acc += field[(ia, ib, ic)] * phases[ic].conj();
                    }
                    g1[(ia, ib)] = acc / ng as f64;
                }
            }
            stage_gamma.insert(two_k, g1);
        }

        // Stages 2-3: alpha sums and beta projection per sector.
        let mut out = Harmonics::empty();
        for (&(two_m, two_k), tab) in &self.dtab {
            let g1 = &stage_gamma[&two_k];
            let phases = &self.exp_alpha[&two_m];
            let mut g2 = Array1::zeros(nb);
            for ib in 0..nb {
                let mut acc = C64::new(0.0, 0.0);
                for ia in 0..na {
                    acc += g1[(ia, ib)] * phases[ia].conj();
                }
                g2[ib] = acc / na as f64;
            }

            let lo = two_j_min(two_m, two_k);
            let wb = self.grid.beta_weights();
            let mut amps = vec![C64::new(0.0, 0.0); tab.nrows()];
            for (row, amp) in amps.iter_mut().enumerate() {
                let two_j = lo + 2 * row as i32;
                let mut acc = C64::new(0.0, 0.0);
                for ib in 0..nb {
                    acc += wb[ib] * tab[(row, ib)] * g2[ib];
                }
                *amp = acc * ((two_j as f64 + 1.0) / 2.0);
            }
            if !amps.is_empty() {
                out.sectors.insert((two_m, two_k), amps);
            }
        }
        Ok(out)
    }

    /// Synthesis from per-sector beta profiles paired with their phases.
    fn synthesize_profiles(&self, profiles: &BTreeMap<(i32, i32), Array1<C64>>) -> Array3<C64> {
        let (na, nb, ng) = self.grid.shape();
        let mut out = Array3::zeros((na, nb, ng));

        // Group sectors by two_m so the alpha phase is applied once.
        let mut by_m: BTreeMap<i32, Array2<C64>> = BTreeMap::new();
        for (&(two_m, two_k), profile) in profiles {
            let acc = by_m
                .entry(two_m)
                .or_insert_with(|| Array2::zeros((nb, ng)));
            let phases = &self.exp_gamma[&two_k];
            for ib in 0..nb {
                let p = profile[ib];
                if p == C64::new(0.0, 0.0) {
                    continue;
                }
                for ic in 0..ng {
                    acc[(ib, ic)] += p * phases[ic];
                }
            }
        }
        for (&two_m, block) in &by_m {
            let phases = &self.exp_alpha[&two_m];
            for ia in 0..na {
                let pa = phases[ia];
                for ib in 0..nb {
                    for ic in 0..ng {
                        out[(ia, ib, ic)] += pa * block[(ib, ic)];
                    }
                }
            }
        }
        out
    }

    fn profiles_from_amps(&self, h: &Harmonics) -> BTreeMap<(i32, i32), Array1<C64>> {
        let nb = self.grid.n_beta;
        let mut profiles = BTreeMap::new();
        for (&(two_m, two_k), amps) in &h.sectors {
            let mut profile = Array1::zeros(nb);
            let lo = two_j_min(two_m, two_k);
            for (row, &a) in amps.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let two_j = lo + 2 * row as i32;
                for ib in 0..nb {
                    profile[ib] += a * self.d_value(two_m, two_k, two_j, ib);
                }
            }
            profiles.insert((two_m, two_k), profile);
        }
        profiles
    }

    /// Evaluates the field represented by harmonic amplitudes on the grid.
    pub fn synthesize(&self, h: &Harmonics) -> Array3<C64> {
        self.synthesize_profiles(&self.profiles_from_amps(h))
    }

    /// Relative remainder `|f - P f| / |f|` of the band-limited projection.
    pub fn band_limit_remainder(&self, field: &Array3<C64>) -> Result<f64> {
        let h = self.analyze(field)?;
        let back = self.synthesize(&h);
        let diff = field - &back;
        let norm = self.grid.norm(field);
        if norm == 0.0 {
            return Ok(0.0);
        }
        Ok(self.grid.norm(&diff) / norm)
    }

    /// Laplace-Beltrami eigenvalue `-j(j+1)/a^2` of the angular metric.
    pub fn lb_eigenvalue(two_j: i32, params: &PhysicalParameters) -> f64 {
        let j = two_j as f64 / 2.0;
        -j * (j + 1.0) / (params.giration_radius * params.giration_radius)
    }

    /// Laplace-Beltrami operator `(1/sqrt g) d_i (sqrt g g^{ij} d_j f)` on the
    /// angular sector, realized spectrally.
    ///
    /// Requires at least 8 nodes per angle and a grid built with the same
    /// giration radius as `params`.
    pub fn laplace_beltrami(
        &self,
        field: &Array3<C64>,
        params: &PhysicalParameters,
    ) -> Result<Array3<C64>> {
        let (na, nb, ng) = self.grid.shape();
        if na < 8 || nb < 8 || ng < 8 {
            return Err(Error::ResolutionTooLow {
                detail: format!("laplace_beltrami needs >= 8 nodes per angle, got {na}x{nb}x{ng}"),
            });
        }
        if (self.grid.giration_radius - params.giration_radius).abs()
            > 1e-14 * params.giration_radius
        {
            return Err(Error::GridMismatch {
                detail: format!(
                    "grid a = {} but params a = {}",
                    self.grid.giration_radius, params.giration_radius
                ),
            });
        }
        let mut h = self.analyze(field)?;
        h.scale_per_j(|two_j| C64::new(Self::lb_eigenvalue(two_j, params), 0.0));
        Ok(self.synthesize(&h))
    }

    /// Spectral partial derivative along one angular axis.
    pub fn derivative(&self, field: &Array3<C64>, axis: AngularAxis) -> Result<Array3<C64>> {
        let h = self.analyze(field)?;
        Ok(self.derivative_from_harmonics(&h, axis))
    }

    /// Derivative evaluated from existing harmonic amplitudes.
    pub fn derivative_from_harmonics(&self, h: &Harmonics, axis: AngularAxis) -> Array3<C64> {
        match axis {
            AngularAxis::Alpha => {
                let mut hh = h.clone();
                for (&(two_m, _), amps) in hh.sectors.iter_mut() {
                    let factor = C64::new(0.0, -(two_m as f64) / 2.0);
                    for a in amps.iter_mut() {
                        *a *= factor;
                    }
                }
                self.synthesize(&hh)
            }
            AngularAxis::Gamma => {
                let mut hh = h.clone();
                for (&(_, two_k), amps) in hh.sectors.iter_mut() {
                    let factor = C64::new(0.0, -(two_k as f64) / 2.0);
                    for a in amps.iter_mut() {
                        *a *= factor;
                    }
                }
                self.synthesize(&hh)
            }
            AngularAxis::Beta => {
                // d/dbeta d^j_{mk} = [C-(k) d^j_{m,k-1} - C+(k) d^j_{m,k+1}] / 2;
                // profiles mix neighbouring k-columns, phases stay at k.
                let nb = self.grid.n_beta;
                let mut profiles = BTreeMap::new();
                for (&(two_m, two_k), amps) in &h.sectors {
                    let mut profile = Array1::zeros(nb);
                    let lo = two_j_min(two_m, two_k);
                    for (row, &a) in amps.iter().enumerate() {
                        if a == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let two_j = lo + 2 * row as i32;
                        let c_minus = ladder_down(two_j, two_k);
                        let c_plus = ladder_up(two_j, two_k);
                        for ib in 0..nb {
                            let down = self.d_value(two_m, two_k - 2, two_j, ib);
                            let up = self.d_value(two_m, two_k + 2, two_j, ib);
                            profile[ib] += a * 0.5 * (c_minus * down - c_plus * up);
                        }
                    }
                    profiles.insert((two_m, two_k), profile);
                }
                self.synthesize_profiles(&profiles)
            }
        }
    }

    /// All three angular derivatives of a field.
    pub fn gradient(&self, field: &Array3<C64>) -> Result<[Array3<C64>; 3]> {
        let h = self.analyze(field)?;
        Ok([
            self.derivative_from_harmonics(&h, AngularAxis::Alpha),
            self.derivative_from_harmonics(&h, AngularAxis::Beta),
            self.derivative_from_harmonics(&h, AngularAxis::Gamma),
        ])
    }
}

/// Derivative along `gamma` by a plain DFT on each gamma line.
///
/// Independent of the D-basis machinery; useful as a cross-check and for the
/// intrinsic angular momentum test `-i hbar d_gamma Psi = hbar s Psi`.
pub fn gamma_derivative(grid: &So3Grid, field: &Array3<C64>) -> Result<Array3<C64>> {
    grid.check_field(field)?;
    let (na, nb, ng) = grid.shape();
    let period = grid.period.length();
    let mut out = Array3::zeros((na, nb, ng));

    let n = ng as i32;
    for ia in 0..na {
        for ib in 0..nb {
            // Forward DFT.
            let mut coeffs = vec![C64::new(0.0, 0.0); ng];
            for (f_idx, c) in coeffs.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..ng {
                    let phase =
                        C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (f_idx * l) as f64 / ng as f64);
                    acc += field[(ia, ib, l)] * phase;
                }
                *c = acc / ng as f64;
            }
            // Differentiate: frequency nu (signed), angular factor 2*pi*nu/period.
            for l in 0..ng {
                let mut acc = C64::new(0.0, 0.0);
                for (f_idx, &c) in coeffs.iter().enumerate() {
                    let nu = if (f_idx as i32) <= n / 2 {
                        f_idx as i32
                    } else {
                        f_idx as i32 - n
                    };
                    if 2 * nu == n {
                        continue; // drop the unpaired Nyquist mode
                    }
                    let k = 2.0 * std::f64::consts::PI * nu as f64 / period;
                    let phase = C64::from_polar(
                        1.0,
                        2.0 * std::f64::consts::PI * (f_idx * l) as f64 / ng as f64,
                    );
                    acc += C64::new(0.0, k) * c * phase;
                }
                out[(ia, ib, l)] = acc;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EulerAngles;
    use crate::wigner::d_element;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plan(n: usize, period: GammaPeriod) -> SpectralPlan {
        let p = PhysicalParameters::natural();
        SpectralPlan::new(Arc::new(So3Grid::new(n, n, n, period, &p).unwrap()))
    }

    fn harmonic_field(
        grid: &So3Grid,
        two_j: i32,
        two_m: i32,
        two_k: i32,
    ) -> Array3<C64> {
        grid.sample(|e: &EulerAngles| {
            let d = d_element(two_j, two_m, two_k, e.beta);
            C64::from_polar(1.0, -(two_m as f64 / 2.0) * e.alpha)
                * d
                * C64::from_polar(1.0, -(two_k as f64 / 2.0) * e.gamma)
        })
    }

    #[test]
    fn analyze_recovers_single_harmonics() {
        let plan = plan(12, GammaPeriod::FourPi);
        for (two_j, two_m, two_k) in [(0, 0, 0), (2, 2, -2), (4, 0, 2), (1, 1, -1), (3, -1, 3)] {
            let field = harmonic_field(plan.grid(), two_j, two_m, two_k);
            let h = plan.analyze(&field).unwrap();
            for (tj, tm, tk, a) in h.iter() {
                let expect = if (tj, tm, tk) == (two_j, two_m, two_k) {
                    1.0
                } else {
                    0.0
                };
                assert!(
                    (a - expect).norm() < 1e-11,
                    "amp({tj},{tm},{tk}) = {a} for harmonic ({two_j},{two_m},{two_k})"
                );
            }
        }
    }

    #[test]
    fn round_trip_is_exact_for_band_limited_fields() {
        let plan = plan(10, GammaPeriod::TwoPi);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut h = Harmonics::empty();
        for two_j in [0, 2, 4] {
            let mut two_m = -two_j;
            while two_m <= two_j {
                let mut two_k = -two_j;
                while two_k <= two_j {
                    h.set_amp(
                        two_j,
                        two_m,
                        two_k,
                        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    );
                    two_k += 2;
                }
                two_m += 2;
            }
        }
        let field = plan.synthesize(&h);
        let h2 = plan.analyze(&field).unwrap();
        for (two_j, two_m, two_k, a) in h.iter() {
            assert!((h2.amp(two_j, two_m, two_k) - a).norm() < 1e-11);
        }
        assert!(plan.band_limit_remainder(&field).unwrap() < 1e-12);
    }

    #[test]
    fn lb_annihilates_constants() {
        let plan = plan(8, GammaPeriod::TwoPi);
        let params = PhysicalParameters::natural();
        let ones = plan.grid().sample(|_| C64::new(1.0, 0.0));
        let lb = plan.laplace_beltrami(&ones, &params).unwrap();
        let worst = lb.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "LB(const) = {worst}");
    }

    #[test]
    fn lb_eigenfields_have_casimir_eigenvalues() {
        let plan = plan(10, GammaPeriod::FourPi);
        let params = PhysicalParameters::new(1.0, 1.4, 1.0).unwrap();
        let grid2 = So3Grid::new(10, 10, 10, GammaPeriod::FourPi, &params).unwrap();
        let plan = {
            let _ = plan;
            SpectralPlan::new(Arc::new(grid2))
        };
        for (two_j, two_m, two_k) in [(2, 0, 0), (2, 2, -2), (4, 2, 0), (1, 1, 1), (3, -3, 1)] {
            let field = harmonic_field(plan.grid(), two_j, two_m, two_k);
            let lb = plan.laplace_beltrami(&field, &params).unwrap();
            let lambda = SpectralPlan::lb_eigenvalue(two_j, &params);
            let mut worst: f64 = 0.0;
            for (z, f) in lb.iter().zip(field.iter()) {
                worst = worst.max((z - lambda * f).norm());
            }
            assert!(
                worst < 1e-10 * lambda.abs().max(1.0),
                "2j = {two_j}: worst deviation {worst}"
            );
        }
    }

    #[test]
    fn lb_is_self_adjoint_under_haar_weights() {
        let plan = plan(8, GammaPeriod::TwoPi);
        let params = PhysicalParameters::natural();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            // Random smooth fields: low-order trigonometric mixtures.
            let (c1, c2, c3) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let f = plan.grid().sample(|e| {
                C64::new(
                    1.0 + c1 * e.beta.cos() + c2 * (e.alpha.cos() * e.beta.sin()),
                    c3 * (e.gamma.sin() * e.beta.sin()),
                )
            });
            let (d1, d2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let g = plan.grid().sample(|e| {
                C64::new(
                    d1 * (e.alpha + e.gamma).cos(),
                    d2 * e.beta.cos() * e.beta.cos(),
                )
            });
            let lb_f = plan.laplace_beltrami(&f, &params).unwrap();
            let lb_g = plan.laplace_beltrami(&g, &params).unwrap();
            let lhs = plan.grid().inner_product(&f, &lb_g);
            let rhs = plan.grid().inner_product(&lb_f, &g);
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn lb_rejects_low_resolution_and_mismatched_params() {
        let plan = plan(6, GammaPeriod::TwoPi);
        let params = PhysicalParameters::natural();
        let ones = plan.grid().sample(|_| C64::new(1.0, 0.0));
        assert!(matches!(
            plan.laplace_beltrami(&ones, &params),
            Err(Error::ResolutionTooLow { .. })
        ));

        let plan8 = self::plan(8, GammaPeriod::TwoPi);
        let other = PhysicalParameters::new(1.0, 2.0, 1.0).unwrap();
        let ones8 = plan8.grid().sample(|_| C64::new(1.0, 0.0));
        assert!(matches!(
            plan8.laplace_beltrami(&ones8, &other),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn spectral_derivatives_match_closed_forms() {
        let plan = plan(10, GammaPeriod::TwoPi);
        // f = cos(beta) => df/dbeta = -sin(beta), df/dalpha = df/dgamma = 0.
        let f = plan.grid().sample(|e| C64::new(e.beta.cos(), 0.0));
        let grads = plan.gradient(&f).unwrap();
        let mut worst: f64 = 0.0;
        for ia in 0..plan.grid().n_alpha {
            for ib in 0..plan.grid().n_beta {
                for ic in 0..plan.grid().n_gamma {
                    let beta = plan.grid().betas()[ib];
                    worst = worst.max((grads[1][(ia, ib, ic)] + beta.sin()).norm());
                    worst = worst.max(grads[0][(ia, ib, ic)].norm());
                    worst = worst.max(grads[2][(ia, ib, ic)].norm());
                }
            }
        }
        assert!(worst < 1e-11, "gradient deviation {worst}");

        // g = sin(beta) cos(alpha): d/dalpha = -sin(beta) sin(alpha),
        // d/dbeta = cos(beta) cos(alpha).
        let g = plan
            .grid()
            .sample(|e| C64::new(e.beta.sin() * e.alpha.cos(), 0.0));
        let grads = plan.gradient(&g).unwrap();
        let mut worst: f64 = 0.0;
        for ia in 0..plan.grid().n_alpha {
            let alpha = plan.grid().alphas()[ia];
            for ib in 0..plan.grid().n_beta {
                let beta = plan.grid().betas()[ib];
                for ic in 0..plan.grid().n_gamma {
                    worst = worst
                        .max((grads[0][(ia, ib, ic)] + beta.sin() * alpha.sin()).norm());
                    worst = worst
                        .max((grads[1][(ia, ib, ic)] - beta.cos() * alpha.cos()).norm());
                }
            }
        }
        assert!(worst < 1e-11, "gradient deviation {worst}");
    }

    #[test]
    fn gamma_derivative_matches_plan_derivative() {
        let plan = plan(9, GammaPeriod::FourPi);
        let f = plan.grid().sample(|e| {
            C64::from_polar(1.0, 0.5 * e.gamma) * (1.5 + e.beta.cos())
                + C64::from_polar(1.0, -1.5 * e.gamma) * e.beta.sin() * e.alpha.sin()
        });
        let via_dft = gamma_derivative(plan.grid(), &f).unwrap();
        let mut worst: f64 = 0.0;
        for ia in 0..plan.grid().n_alpha {
            for ib in 0..plan.grid().n_beta {
                for ic in 0..plan.grid().n_gamma {
                    let e = plan.grid().node(ia, ib, ic);
                    let expect = C64::new(0.0, 0.5) * C64::from_polar(1.0, 0.5 * e.gamma)
                        * (1.5 + e.beta.cos())
                        + C64::new(0.0, -1.5)
                            * C64::from_polar(1.0, -1.5 * e.gamma)
                            * e.beta.sin()
                            * e.alpha.sin();
                    worst = worst.max((via_dft[(ia, ib, ic)] - expect).norm());
                }
            }
        }
        assert!(worst < 1e-11, "gamma derivative deviation {worst}");
    }

    #[test]
    fn fd_oracle_confirms_lb_on_a_smooth_field() {
        // Independent route: central differences of the closed-form operator
        // (1/s) d_b(s d_b f) + (d_a^2 + d_g^2 - 2 c d_a d_g) f / s^2, Richardson
        // extrapolated, against the spectral operator at an interior node.
        let plan = plan(12, GammaPeriod::TwoPi);
        let params = PhysicalParameters::natural();
        let func = |a: f64, b: f64, g: f64| (1.0 + b.cos()).powi(2) * (a + g).cos() * 0.25;
        let field = plan.grid().sample(|e| C64::new(func(e.alpha, e.beta, e.gamma), 0.0));
        let lb = plan.laplace_beltrami(&field, &params).unwrap();

        let lb_fd_at = |a: f64, b: f64, g: f64, h: f64| -> f64 {
            let s = b.sin();
            let c = b.cos();
            let d2a = (func(a + h, b, g) - 2.0 * func(a, b, g) + func(a - h, b, g)) / (h * h);
            let d2g = (func(a, b, g + h) - 2.0 * func(a, b, g) + func(a, b, g - h)) / (h * h);
            let dadg = (func(a + h, b, g + h) - func(a + h, b, g - h) - func(a - h, b, g + h)
                + func(a - h, b, g - h))
                / (4.0 * h * h);
            let db = |bb: f64| {
                (func(a, bb + h, g) - func(a, bb - h, g)) / (2.0 * h)
            };
            let beta_term = ((b + h).sin() * db(b + h) - (b - h).sin() * db(b - h)) / (2.0 * h * s);
            beta_term + (d2a + d2g - 2.0 * c * dadg) / (s * s)
        };

        let (ia, ib, ic) = (3, 6, 2);
        let node = plan.grid().node(ia, ib, ic);
        let coarse = lb_fd_at(node.alpha, node.beta, node.gamma, 1e-3);
        let fine = lb_fd_at(node.alpha, node.beta, node.gamma, 5e-4);
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        assert!(
            (lb[(ia, ib, ic)].re - extrapolated).abs() < 1e-6,
            "spectral {} vs FD {}",
            lb[(ia, ib, ic)].re,
            extrapolated
        );
    }

    #[test]
    fn band_limits_respect_grid_and_cover() {
        let p = PhysicalParameters::natural();
        let g_2pi = So3Grid::new(16, 16, 16, GammaPeriod::TwoPi, &p).unwrap();
        let plan = SpectralPlan::new(Arc::new(g_2pi));
        assert_eq!(plan.two_j_max_even(), 14);
        assert_eq!(plan.two_j_max_odd(), None);

        let g_4pi = So3Grid::new(16, 16, 16, GammaPeriod::FourPi, &p).unwrap();
        let plan = SpectralPlan::new(Arc::new(g_4pi));
        assert_eq!(plan.two_j_max_even(), 6); // (16-1)/2 = 7 -> even floor 6
        assert_eq!(plan.two_j_max_odd(), Some(7));
    }
}
