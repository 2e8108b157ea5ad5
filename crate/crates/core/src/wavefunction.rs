//! Spinor fields, the scalar wavefunction `Psi = e^{i s gamma} Phi_s`, and the
//! maps between the two representations.
//!
//! The spinor side describes a spin-`s` state by `2s+1` complex components
//! `psi^sigma` on a (possibly trivial) spatial grid. The scalar side samples
//! `Psi(alpha, beta, gamma; r) = N e^{i s gamma} sum_sigma c_sigma(alpha, beta) psi^sigma(r)`
//! on an [`So3Grid`], with `N` chosen so that `int rho sqrt(g) = 1` over the
//! chart; the factor is recorded on the state. Projecting back uses the
//! orthogonality of the `c_sigma e^{i s gamma}` under the Haar measure, which
//! the Gauss-Legendre grid integrates exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3, Array4};

use crate::error::{Error, Result};
use crate::geometry::{gamma_derivative, EulerAngles, GammaPeriod, So3Grid};
use crate::params::PhysicalParameters;
use crate::wigner::{big_d, d_element, SpinLabel};
use crate::C64;

/// Relative `|Psi|` threshold below which phase unwrapping refuses to cross.
pub const NODE_THRESHOLD_REL: f64 = 1e-10;

/// Tolerance on the off-mode gamma content accepted by the inverse map.
pub const GAMMA_MODE_TOL: f64 = 1e-8;

/// Discrete set of spatial sample points with quadrature weights.
///
/// Every claim implemented here is angular, so the default is a single point
/// at the origin; the data model keeps the spatial axis so multi-point states
/// carry through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SpatialGrid {
    pub fn single_point() -> Self {
        Self {
            points: vec![[0.0; 3]],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for SpatialGrid {
    fn default() -> Self {
        Self::single_point()
    }
}

/// A `(2s+1)`-component spinor field, rows ordered by descending projection.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub spin: SpinLabel,
    /// Shape `(2s+1, n_space)`.
    pub components: Array2<C64>,
    pub spatial: SpatialGrid,
    pub time: f64,
}

impl SpinorField {
    pub fn new(
        spin: SpinLabel,
        components: Array2<C64>,
        spatial: SpatialGrid,
        time: f64,
    ) -> Result<Self> {
        if components.nrows() != spin.dim() || components.ncols() != spatial.len() {
            return Err(Error::GridMismatch {
                detail: format!(
                    "spinor components {:?} vs spin dim {} and {} spatial points",
                    components.dim(),
                    spin.dim(),
                    spatial.len()
                ),
            });
        }
        Ok(Self {
            spin,
            components,
            spatial,
            time,
        })
    }

    /// Single-spatial-point state from a component list (descending sigma).
    pub fn single_point(spin: SpinLabel, components: &[C64]) -> Result<Self> {
        let n = spin.dim();
        if components.len() != n {
            return Err(Error::GridMismatch {
                detail: format!("expected {n} components, got {}", components.len()),
            });
        }
        let arr = Array2::from_shape_vec((n, 1), components.to_vec()).expect("shape");
        Self::new(spin, arr, SpatialGrid::single_point(), 0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        let mut total = 0.0;
        for (is, &w) in self.spatial.weights.iter().enumerate() {
            for r in 0..self.spin.dim() {
                total += w * self.components[(r, is)].norm_sqr();
            }
        }
        total
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sq().sqrt();
        if n < 1e-300 {
            return Err(Error::NotNormalizable { norm: n });
        }
        self.components.mapv_inplace(|z| z / n);
        Ok(self)
    }

    /// Applies a lab-frame rotation: `psi -> D^s(rotation) psi`.
    ///
    /// `gamma` is honored on the 4*pi cover, so a `2*pi` turn flips the sign
    /// of every half-integer-spin spinor exactly.
    pub fn rotate_lab_frame(&self, rotation: &EulerAngles) -> Self {
        let d = big_d(self.spin, rotation);
        let rotated = d.entries.dot(&self.components);
        Self {
            spin: self.spin,
            components: rotated,
            spatial: self.spatial.clone(),
            time: self.time,
        }
    }

    pub fn max_component_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(other.components.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The scalar wavefunction sampled on `So3Grid x SpatialGrid`.
#[derive(Debug, Clone)]
pub struct ScalarWavefunction {
    pub spin: SpinLabel,
    pub grid: Arc<So3Grid>,
    pub spatial: SpatialGrid,
    /// Shape `(n_space, n_alpha, n_beta, n_gamma)`.
    pub values: Array4<C64>,
    /// Normalization factor applied when the state was built from a spinor.
    pub norm_factor: f64,
    pub time: f64,
}

impl ScalarWavefunction {
    /// Angular slice at one spatial point.
    pub fn angular(&self, is: usize) -> Array3<C64> {
        self.values.index_axis(ndarray::Axis(0), is).to_owned()
    }

    pub fn set_angular(&mut self, is: usize, field: &Array3<C64>) {
        self.values
            .index_axis_mut(ndarray::Axis(0), is)
            .assign(field);
    }

    /// Full-measure squared norm `a^3 sum_sp w_sp sum_q w_q |Psi|^2`.
    pub fn norm_sq(&self) -> f64 {
        let scale = self.grid.measure_scale();
        let mut total = 0.0;
        for (is, &w_sp) in self.spatial.weights.iter().enumerate() {
            let f = self.angular(is);
            total += w_sp * scale * self.grid.inner_product(&f, &f).re;
        }
        total
    }

    /// Density `rho = |Psi|^2` on all nodes.
    pub fn density(&self) -> Array4<f64> {
        self.values.mapv(|z| z.norm_sqr())
    }

    /// Max over the grid of the gamma-spread of `rho` along gamma lines.
    pub fn rho_gamma_spread(&self) -> f64 {
        let (ns, na, nb, ng) = self.values.dim();
        let mut worst: f64 = 0.0;
        for is in 0..ns {
            for ia in 0..na {
                for ib in 0..nb {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for ic in 0..ng {
                        let r = self.values[(is, ia, ib, ic)].norm_sqr();
                        lo = lo.min(r);
                        hi = hi.max(r);
                    }
                    worst = worst.max(hi - lo);
                }
            }
        }
        worst
    }

    /// RMS residual of `-i hbar d_gamma Psi = hbar s Psi`, normalized by the
    /// state norm; the intrinsic angular momentum test.
    pub fn intrinsic_momentum_residual(&self, params: &PhysicalParameters) -> Result<f64> {
        let s = self.spin.spin();
        let hbar = params.hbar;
        let mut num = 0.0;
        let mut den = 0.0;
        for is in 0..self.spatial.len() {
            let f = self.angular(is);
            let df = gamma_derivative(&self.grid, &f)?;
            for (z, dz) in f.iter().zip(df.iter()) {
                let lhs = C64::new(0.0, -hbar) * dz;
                let rhs = hbar * s * z;
                num += (lhs - rhs).norm_sqr();
                den += rhs.norm_sqr().max(z.norm_sqr());
            }
        }
        if den == 0.0 {
            return Ok(0.0);
        }
        Ok((num / den).sqrt())
    }

    /// Lab-frame rotation as a point transformation of the SO(3) coordinates.
    ///
    /// The scalar field lives on SO(3) proper, so the rotation enters through
    /// its class in SO(3): `gamma` is reduced mod `2*pi` and no phase factor
    /// appears. A `2*pi` turn therefore leaves every value bit-identical.
    pub fn rotate_lab_frame(&self, rotation: &EulerAngles) -> Result<Self> {
        let reduced = EulerAngles {
            alpha: rotation.alpha,
            beta: rotation.beta,
            gamma: rotation.gamma.rem_euclid(2.0 * PI),
        };
        if reduced == EulerAngles::zero() {
            return Ok(self.clone());
        }
        let spinor = spinor_from_scalar(self)?;
        let rotated = spinor.rotate_lab_frame(&reduced);
        let mut out = scalar_from_spinor(&rotated, Arc::clone(&self.grid))?;
        out.time = self.time;
        Ok(out)
    }
}

/// Builds the scalar wavefunction from a spinor:
/// `Psi = N e^{i s gamma} sum_sigma c_sigma(alpha, beta) psi^sigma`.
///
/// The spinor must be normalized; half-integer spin requires a 4*pi grid. The
/// restored normalization factor `N = sqrt((2s+1) / (V a^3))` is recorded.
pub fn scalar_from_spinor(spinor: &SpinorField, grid: Arc<So3Grid>) -> Result<ScalarWavefunction> {
    let spin = spinor.spin;
    if spin.is_half_integer() && grid.period != GammaPeriod::FourPi {
        return Err(Error::PeriodMismatch {
            two_s: spin.two_s(),
        });
    }
    let norm = spinor.norm_sq();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalizable { norm: norm.sqrt() });
    }

    let (na, nb, ng) = grid.shape();
    let ns = spinor.spatial.len();
    let volume = grid.haar_volume();
    let n_factor = ((spin.dim() as f64) / (volume * grid.measure_scale())).sqrt();
    let s = spin.spin();

    // c_sigma(alpha, beta) e^{i s gamma} evaluated on the product grid.
    let mut d_col = Array2::zeros((spin.dim(), nb));
    for (row, two_sigma) in spin.projections_desc().enumerate() {
        for ib in 0..nb {
            d_col[(row, ib)] = d_element(spin.two_s(), two_sigma, spin.two_s(), grid.betas()[ib]);
        }
    }
    let mut values = Array4::zeros((ns, na, nb, ng));
    for is in 0..ns {
        for ia in 0..na {
            let alpha = grid.alphas()[ia];
            for ib in 0..nb {
                let mut phi = C64::new(0.0, 0.0);
                for (row, two_sigma) in spin.projections_desc().enumerate() {
                    let sigma = two_sigma as f64 / 2.0;
                    let c = C64::from_polar(1.0, sigma * alpha) * d_col[(row, ib)];
                    phi += c * spinor.components[(row, is)];
                }
                for ic in 0..ng {
                    let gamma_phase = C64::from_polar(1.0, s * grid.gammas()[ic]);
                    values[(is, ia, ib, ic)] = n_factor * gamma_phase * phi;
                }
            }
        }
    }

    Ok(ScalarWavefunction {
        spin,
        grid,
        spatial: spinor.spatial.clone(),
        values,
        norm_factor: n_factor,
        time: spinor.time,
    })
}

/// Fraction of the squared norm lying outside the `e^{i s gamma}` mode.
pub fn gamma_off_mode_fraction(scalar: &ScalarWavefunction) -> f64 {
    let grid = &scalar.grid;
    let (ns, na, nb, ng) = scalar.values.dim();
    // Frequency index of e^{+i s gamma} in the DFT over one gamma period.
    let nu = match grid.period {
        GammaPeriod::TwoPi => scalar.spin.two_s() / 2,
        GammaPeriod::FourPi => scalar.spin.two_s(),
    } as usize;
    let mut in_mode = 0.0;
    let mut total = 0.0;
    for is in 0..ns {
        for ia in 0..na {
            for ib in 0..nb {
                let mut coeff = C64::new(0.0, 0.0);
                let mut power = 0.0;
                for l in 0..ng {
                    let z = scalar.values[(is, ia, ib, l)];
                    let phase = C64::from_polar(1.0, -2.0 * PI * (nu * l) as f64 / ng as f64);
                    coeff += z * phase;
                    power += z.norm_sqr();
                }
                let w = grid.weight(ia, ib, 0) * scalar.spatial.weights[is];
                in_mode += w * coeff.norm_sqr() / ng as f64;
                total += w * power;
            }
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    ((total - in_mode) / total).max(0.0)
}

/// Projects the scalar wavefunction back onto the spinor components by Haar
/// quadrature against the `c_sigma e^{i s gamma}` basis.
///
/// Errors when the gamma content is not a pure `e^{i s gamma}` mode or when
/// the projection has vanishing norm.
pub fn spinor_from_scalar(scalar: &ScalarWavefunction) -> Result<SpinorField> {
    let spin = scalar.spin;
    let grid = &scalar.grid;
    let off = gamma_off_mode_fraction(scalar);
    if off > GAMMA_MODE_TOL {
        return Err(Error::MixedGammaMode { off_mode: off });
    }

    let (ns, na, nb, ng) = scalar.values.dim();
    let s = spin.spin();
    let volume = grid.haar_volume();

    let mut components = Array2::zeros((spin.dim(), ns));
    for is in 0..ns {
        for (row, two_sigma) in spin.projections_desc().enumerate() {
            let sigma = two_sigma as f64 / 2.0;
            let mut acc = C64::new(0.0, 0.0);
            for ia in 0..na {
                let alpha = grid.alphas()[ia];
                let phase_a = C64::from_polar(1.0, -sigma * alpha);
                for ib in 0..nb {
                    let d = d_element(spin.two_s(), two_sigma, spin.two_s(), grid.betas()[ib]);
                    let w = grid.weight(ia, ib, 0);
                    let mut gamma_sum = C64::new(0.0, 0.0);
                    for ic in 0..ng {
                        let phase_g = C64::from_polar(1.0, -s * grid.gammas()[ic]);
                        gamma_sum += phase_g * scalar.values[(is, ia, ib, ic)];
                    }
                    acc += w * phase_a * d * gamma_sum;
                }
            }
            components[(row, is)] = acc * (spin.dim() as f64 / volume);
        }
    }

    SpinorField::new(spin, components, scalar.spatial.clone(), scalar.time)?.normalized()
}

/// Unwraps the phase of a nonvanishing field into a continuous angle: first
/// along the base alpha line, then along beta lines in the gamma = 0 slice,
/// then along every gamma line.
///
/// Fails with [`Error::NodeCrossing`] when a step would cross a node where
/// `|Psi|` falls below `NODE_THRESHOLD_REL * max|Psi|`.
pub fn unwrap_phase(values: &Array3<C64>) -> Result<Array3<f64>> {
    let (na, nb, ng) = values.dim();
    let max_mod = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = NODE_THRESHOLD_REL * max_mod;
    let check = |ia: usize, ib: usize, ic: usize| -> Result<f64> {
        let z = values[(ia, ib, ic)];
        let m = z.norm();
        if m < threshold {
            return Err(Error::NodeCrossing {
                index: (ia, ib, ic),
                modulus: m,
                threshold,
            });
        }
        Ok(z.arg())
    };
    let wrap = |d: f64| -> f64 { d - (d / (2.0 * PI)).round() * 2.0 * PI };

    let mut theta = Array3::<f64>::zeros((na, nb, ng));
    theta[(0, 0, 0)] = check(0, 0, 0)?;
    for ia in 1..na {
        let step = wrap(check(ia, 0, 0)? - check(ia - 1, 0, 0)?);
        theta[(ia, 0, 0)] = theta[(ia - 1, 0, 0)] + step;
    }
    for ia in 0..na {
        for ib in 1..nb {
            let step = wrap(check(ia, ib, 0)? - check(ia, ib - 1, 0)?);
            theta[(ia, ib, 0)] = theta[(ia, ib - 1, 0)] + step;
        }
    }
    for ia in 0..na {
        for ib in 0..nb {
            for ic in 1..ng {
                let step = wrap(check(ia, ib, ic)? - check(ia, ib, ic - 1)?);
                theta[(ia, ib, ic)] = theta[(ia, ib, ic - 1)] + step;
            }
        }
    }
    Ok(theta)
}

/// Polar decomposition `Psi = sqrt(rho) e^{i S / hbar}` with `S` unwrapped by
/// [`unwrap_phase`] on every spatial slice.
pub fn density_and_action(
    scalar: &ScalarWavefunction,
    params: &PhysicalParameters,
) -> Result<(Array4<f64>, Array4<f64>)> {
    let (ns, na, nb, ng) = scalar.values.dim();
    let rho = scalar.density();
    let mut action = Array4::zeros((ns, na, nb, ng));
    for is in 0..ns {
        let theta = unwrap_phase(&scalar.angular(is))?;
        for ia in 0..na {
            for ib in 0..nb {
                for ic in 0..ng {
                    action[(is, ia, ib, ic)] = params.hbar * theta[(ia, ib, ic)];
                }
            }
        }
    }
    Ok((rho, action))
}

/// Max pointwise error of the reconstruction `sqrt(rho) e^{i S / hbar} = Psi`.
pub fn reconstruction_error(
    scalar: &ScalarWavefunction,
    rho: &Array4<f64>,
    action: &Array4<f64>,
    params: &PhysicalParameters,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (idx, z) in scalar.values.indexed_iter() {
        let rebuilt = C64::from_polar(rho[idx].max(0.0).sqrt(), action[idx] / params.hbar);
        worst = worst.max((rebuilt - z).norm());
    }
    worst
}
