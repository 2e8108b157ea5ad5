//! Dynamical core: Weyl scalar curvature from the density, Hamilton-Jacobi
//! and continuity residuals, spectral free-rotor evolution, and the
//! Madelung-equivalence convergence report.
//!
//! The polar pair `(rho, S)` of any Schroedinger solution satisfies
//!
//! ```text
//! -dS/dt = g^{ij} d_i S d_j S / (2m) + xi^2 hbar^2 R_W / (2m)
//! drho/dt + (1/sqrt g) d_i (sqrt g rho g^{ij} d_j S / m) = 0
//! R_W = Rbar - (1/xi^2) (LB sqrt rho) / sqrt rho
//! ```
//!
//! and the two residual operators here measure exactly that, with all spatial
//! derivatives taken spectrally and the time derivatives either exact (from
//! the mode representation) or by central differences between samples. The
//! continuity current keeps the density factor `rho g^{ij} d_j S`, which is
//! what the polar substitution requires.

use std::sync::Arc;

use ndarray::{Array3, Array4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Harmonics, So3Grid, SpectralPlan};
use crate::params::PhysicalParameters;
use crate::wavefunction::{unwrap_phase, ScalarWavefunction, SpatialGrid};
use crate::C64;

/// Weyl scalar curvature field `R_W = Rbar - (1/xi^2) (LB sqrt rho)/sqrt rho`.
#[derive(Debug, Clone)]
pub struct WeylCurvatureField {
    /// Total `R_W` on the grid.
    pub values: Array3<f64>,
    /// The constant Riemann part `Rbar = 3/(2 a^2)`.
    pub riemann_part: f64,
    /// The density-dependent quantum term (zero for constant densities).
    pub quantum_part: Array3<f64>,
}

/// Builds the Weyl curvature from a strictly positive density.
pub fn weyl_curvature(
    rho: &Array3<f64>,
    plan: &SpectralPlan,
    params: &PhysicalParameters,
) -> Result<WeylCurvatureField> {
    let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_rho > 0.0) {
        return Err(Error::NonpositiveDensity { min_rho });
    }
    let sqrt_rho = rho.mapv(|r| C64::new(r.sqrt(), 0.0));
    let lb = plan.laplace_beltrami(&sqrt_rho, params)?;
    let riemann_part = params.riemann_curvature();
    let inv_xi_sq = 1.0 / params.weyl_xi_sq();
    let mut quantum = Array3::zeros(rho.dim());
    for (idx, q) in quantum.indexed_iter_mut() {
        *q = -inv_xi_sq * lb[idx].re / rho[idx].sqrt();
    }
    let values = quantum.mapv(|q| q + riemann_part);
    Ok(WeylCurvatureField {
        values,
        riemann_part,
        quantum_part: quantum,
    })
}

/// The Madelung fields entering the residual operators.
///
/// `grad_s` holds the angular components `(d_alpha S, d_beta S, d_gamma S)`.
/// Constructors derive them spectrally from the wavefunction through
/// `d_i S = hbar Im(conj(Psi) d_i Psi) / rho`, which needs no phase
/// unwrapping; the fields may also be assembled by hand.
#[derive(Debug, Clone)]
pub struct PolarFields {
    pub rho: Array3<f64>,
    pub drho_dt: Array3<f64>,
    pub grad_s: [Array3<f64>; 3],
    pub ds_dt: Array3<f64>,
    /// Spectral gradient of `rho`.
    pub grad_rho: [Array3<f64>; 3],
    /// `LB S_per`, the Laplace-Beltrami of the periodic part of the action.
    /// The winding-linear parts `slope_a * alpha + slope_g * gamma` drop out
    /// of LB identically, so this equals `LB S`.
    pub lb_action: Array3<f64>,
}

impl PolarFields {
    /// Exact fields of a dynamical state: time derivatives from the mode
    /// representation, spatial gradients spectral.
    pub fn from_state_exact(
        state: &DynamicalState,
        plan: &SpectralPlan,
        params: &PhysicalParameters,
    ) -> Result<Self> {
        let psi = state.state.angular(0);
        let dpsi_dt = state.dpsi_dt(plan, params);
        Self::from_wavefunction(&psi, &dpsi_dt, plan, params)
    }

    /// Fields with central-difference time derivatives between neighbouring
    /// samples; the spatial part is evaluated on the middle state.
    pub fn from_state_triplet(
        prev: &DynamicalState,
        mid: &DynamicalState,
        next: &DynamicalState,
        plan: &SpectralPlan,
        params: &PhysicalParameters,
    ) -> Result<Self> {
        let dt2 = next.state.time - prev.state.time;
        if dt2 <= 0.0 {
            return Err(Error::InvalidParameters {
                reason: "triplet samples must be time-ordered".into(),
            });
        }
        let psi = mid.state.angular(0);
        let psi_prev = prev.state.angular(0);
        let psi_next = next.state.angular(0);
        let zero = Array3::zeros(psi.dim());
        let mut fields = Self::from_wavefunction(&psi, &zero, plan, params)?;
        for (idx, v) in fields.drho_dt.indexed_iter_mut() {
            *v = (psi_next[idx].norm_sqr() - psi_prev[idx].norm_sqr()) / dt2;
        }
        for (idx, v) in fields.ds_dt.indexed_iter_mut() {
            // S = hbar arg(Psi); differencing the phase through the ratio
            // keeps the branch continuous for small steps.
            let ratio = psi_next[idx] * psi_prev[idx].conj();
            *v = params.hbar * ratio.arg() / dt2;
        }
        Ok(fields)
    }

    /// Spectral gradients of `Psi` turned into polar-field gradients via
    /// `d_i S = hbar Im(conj Psi d_i Psi) / rho`; the two time-derivative
    /// fields come from `dpsi_dt` the same way.
    pub fn from_wavefunction(
        psi: &Array3<C64>,
        dpsi_dt: &Array3<C64>,
        plan: &SpectralPlan,
        params: &PhysicalParameters,
    ) -> Result<Self> {
        let hbar = params.hbar;
        let rho = psi.mapv(|z| z.norm_sqr());
        let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_rho > 0.0) {
            return Err(Error::NonpositiveDensity { min_rho });
        }
        let grads = plan.gradient(psi)?;
        let grad_of = |g: &Array3<C64>| -> Array3<f64> {
            let mut out = Array3::zeros(rho.dim());
            for (idx, v) in out.indexed_iter_mut() {
                *v = hbar * (psi[idx].conj() * g[idx]).im / rho[idx];
            }
            out
        };
        let grad_s = [grad_of(&grads[0]), grad_of(&grads[1]), grad_of(&grads[2])];

        let mut drho_dt = Array3::zeros(rho.dim());
        let mut ds_dt = Array3::zeros(rho.dim());
        for (idx, v) in drho_dt.indexed_iter_mut() {
            *v = 2.0 * (psi[idx].conj() * dpsi_dt[idx]).re;
        }
        for (idx, v) in ds_dt.indexed_iter_mut() {
            *v = hbar * (psi[idx].conj() * dpsi_dt[idx]).im / rho[idx];
        }

        let rho_c = rho.mapv(|r| C64::new(r, 0.0));
        let grad_rho_c = plan.gradient(&rho_c)?;
        let grad_rho = [
            grad_rho_c[0].mapv(|z| z.re),
            grad_rho_c[1].mapv(|z| z.re),
            grad_rho_c[2].mapv(|z| z.re),
        ];

        let lb_action = lb_of_action(psi, plan, params)?;

        Ok(Self {
            rho,
            drho_dt,
            grad_s,
            ds_dt,
            grad_rho,
            lb_action,
        })
    }
}

/// Laplace-Beltrami of the action `S = hbar arg(Psi)`: the phase is unwrapped,
/// the winding-linear parts `slope_a * alpha + slope_g * gamma` are removed
/// (LB annihilates them identically because `sqrt(g) g^{i alpha}` and
/// `sqrt(g) g^{i gamma}` depend on beta only), and the periodic remainder goes
/// through the spectral operator.
fn lb_of_action(
    psi: &Array3<C64>,
    plan: &SpectralPlan,
    params: &PhysicalParameters,
) -> Result<Array3<f64>> {
    let grid = plan.grid();
    let (na, nb, ng) = grid.shape();
    let theta = unwrap_phase(psi)?;

    let wrap = |d: f64| -> f64 {
        d - (d / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI
    };
    // Winding slopes are homotopy invariants; one loop of each suffices.
    let period = grid.period.length();
    let closure_g = wrap(psi[(0, 0, 0)].arg() - psi[(0, 0, ng - 1)].arg());
    let total_g = theta[(0, 0, ng - 1)] - theta[(0, 0, 0)] + closure_g;
    let slope_g = (2.0 * total_g / period).round() / 2.0;
    let closure_a = wrap(psi[(0, 0, 0)].arg() - psi[(na - 1, 0, 0)].arg());
    let total_a = theta[(na - 1, 0, 0)] - theta[(0, 0, 0)] + closure_a;
    let slope_a = (total_a / std::f64::consts::PI).round() / 2.0;

    let mut periodic = Array3::zeros((na, nb, ng));
    for ia in 0..na {
        for ib in 0..nb {
            for ic in 0..ng {
                let lin = slope_a * grid.alphas()[ia] + slope_g * grid.gammas()[ic];
                periodic[(ia, ib, ic)] = C64::new(theta[(ia, ib, ic)] - lin, 0.0);
            }
        }
    }
    let lb = plan.laplace_beltrami(&periodic, params)?;
    Ok(lb.mapv(|z| params.hbar * z.re))
}

/// Pointwise residual of the Hamilton-Jacobi equation.
pub fn hje_residual_field(
    fields: &PolarFields,
    plan: &SpectralPlan,
    params: &PhysicalParameters,
) -> Result<Array3<f64>> {
    let grid = plan.grid();
    let curvature = weyl_curvature(&fields.rho, plan, params)?;
    let a2 = params.giration_radius * params.giration_radius;
    let m = params.mass;
    let coupling = params.weyl_xi_sq() * params.hbar * params.hbar / (2.0 * m);

    let (na, nb, ng) = grid.shape();
    let mut out = Array3::zeros((na, nb, ng));
    for ia in 0..na {
        for ib in 0..nb {
            let beta = grid.betas()[ib];
            let (sin_b, cos_b) = beta.sin_cos();
            for ic in 0..ng {
                let ga = fields.grad_s[0][(ia, ib, ic)];
                let gb = fields.grad_s[1][(ia, ib, ic)];
                let gg = fields.grad_s[2][(ia, ib, ic)];
                // g^{ij} d_i S d_j S = [((ga - c gg)/s)^2 + gg^2 + gb^2] / a^2
                let mixed = (ga - cos_b * gg) / sin_b;
                let kinetic = (mixed * mixed + gg * gg + gb * gb) / (2.0 * m * a2);
                out[(ia, ib, ic)] = fields.ds_dt[(ia, ib, ic)]
                    + kinetic
                    + coupling * curvature.values[(ia, ib, ic)];
            }
        }
    }
    Ok(out)
}

/// Volume-normalized RMS of the Hamilton-Jacobi residual under Haar quadrature.
pub fn hje_residual(
    fields: &PolarFields,
    plan: &SpectralPlan,
    params: &PhysicalParameters,
) -> Result<f64> {
    let field = hje_residual_field(fields, plan, params)?;
    Ok(plan.grid().rms(&field))
}

/// Pointwise residual of the continuity equation with the current
/// `j^i = rho g^{ij} d_j S / m`, in the product-rule form
/// `drho/dt + (grad rho . grad S + rho LB S) / m`.
///
/// The chart components of the current are not smooth at the poles, so the
/// divergence is evaluated through invariant scalars only: the metric
/// contraction of the two gradients plus `rho` times the Laplace-Beltrami of
/// the action.
pub fn continuity_residual_field(
    fields: &PolarFields,
    plan: &SpectralPlan,
    params: &PhysicalParameters,
) -> Result<Array3<f64>> {
    let grid = plan.grid();
    let a2 = params.giration_radius * params.giration_radius;
    let m = params.mass;
    let (na, nb, ng) = grid.shape();

    let mut out = Array3::zeros((na, nb, ng));
    for ia in 0..na {
        for ib in 0..nb {
            let beta = grid.betas()[ib];
            let (sin_b, cos_b) = beta.sin_cos();
            for ic in 0..ng {
                let ra = fields.grad_rho[0][(ia, ib, ic)];
                let rb = fields.grad_rho[1][(ia, ib, ic)];
                let rg = fields.grad_rho[2][(ia, ib, ic)];
                let sa = fields.grad_s[0][(ia, ib, ic)];
                let sb = fields.grad_s[1][(ia, ib, ic)];
                let sg = fields.grad_s[2][(ia, ib, ic)];
                // g^{ij} u_i v_j = [((u_a - c u_g)(v_a - c v_g))/s^2
                //                  + u_g v_g + u_b v_b] / a^2
                let contraction = ((ra - cos_b * rg) * (sa - cos_b * sg) / (sin_b * sin_b)
                    + rg * sg
                    + rb * sb)
                    / a2;
                let div = contraction + fields.rho[(ia, ib, ic)] * fields.lb_action[(ia, ib, ic)];
                out[(ia, ib, ic)] = fields.drho_dt[(ia, ib, ic)] + div / m;
            }
        }
    }
    Ok(out)
}

/// Volume-normalized RMS of the continuity residual.
pub fn continuity_residual(
    fields: &PolarFields,
    plan: &SpectralPlan,
    params: &PhysicalParameters,
) -> Result<f64> {
    let field = continuity_residual_field(fields, plan, params)?;
    Ok(plan.grid().rms(&field))
}

/// Constant curvature shift `xi^2 hbar^2 Rbar / (2m)` kept explicit in the
/// rotor spectrum rather than gauged away.
pub fn curvature_energy_shift(params: &PhysicalParameters) -> f64 {
    params.weyl_xi_sq() * params.hbar * params.hbar * params.riemann_curvature()
        / (2.0 * params.mass)
}

/// Free-rotor eigenvalue `E_j = hbar^2 j(j+1) / (2I) + shift`.
pub fn rotor_energy(two_j: i32, params: &PhysicalParameters) -> f64 {
    let j = two_j as f64 / 2.0;
    params.hbar * params.hbar * j * (j + 1.0) / (2.0 * params.inertia())
        + curvature_energy_shift(params)
}

/// One sampled point of a spectral evolution run.
#[derive(Debug, Clone)]
pub struct DynamicalState {
    pub state: ScalarWavefunction,
    /// Harmonic amplitudes at this time.
    pub modes: Harmonics,
    pub dt: f64,
    pub step: usize,
    /// Energy expectation from the mode amplitudes.
    pub energy: f64,
    /// Full-measure norm from the synthesized grid values.
    pub norm: f64,
}

impl DynamicalState {
    /// Exact time derivative `dPsi/dt = -(i/hbar) H Psi` from the modes.
    pub fn dpsi_dt(&self, plan: &SpectralPlan, params: &PhysicalParameters) -> Array3<C64> {
        let mut h = self.modes.clone();
        let hbar = params.hbar;
        h.scale_per_j(|two_j| C64::new(0.0, -rotor_energy(two_j, params) / hbar));
        plan.synthesize(&h)
    }
}

/// Options for [`evolve`].
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Largest admitted `2j` in the initial state.
    pub two_j_cap: i32,
    /// Keep every `sample_every`-th step (step 0 and the last are always kept).
    pub sample_every: usize,
    /// Relative band-limit remainder accepted for the initial state.
    pub band_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            two_j_cap: 8,
            sample_every: 1,
            band_tol: 1e-10,
        }
    }
}

/// Spectral evolution of the free rotor: every mode advances by
/// `exp(-i E_j t / hbar)` with `E_j` from [`rotor_energy`]; the constant
/// curvature shift stays in the spectrum and is reported through the energy.
///
/// The state must be band-limited on its grid and within the mode cap.
/// Evolution is angular only: multi-point spatial grids are rejected.
pub fn evolve(
    initial: &ScalarWavefunction,
    dt: f64,
    steps: usize,
    params: &PhysicalParameters,
    options: &EvolveOptions,
) -> Result<Vec<DynamicalState>> {
    if initial.spatial.len() != 1 {
        return Err(Error::GridMismatch {
            detail: "angular-sector evolution supports a single spatial point".into(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameters {
            reason: format!("dt = {dt} must be positive"),
        });
    }
    let grid = Arc::clone(&initial.grid);
    let plan = SpectralPlan::new(Arc::clone(&grid));
    let field = initial.angular(0);

    let h0 = plan.analyze(&field)?;
    let remainder = {
        let back = plan.synthesize(&h0);
        let diff = &field - &back;
        let norm = grid.norm(&field);
        if norm == 0.0 {
            return Err(Error::NotNormalizable { norm: 0.0 });
        }
        grid.norm(&diff) / norm
    };
    if remainder > options.band_tol {
        return Err(Error::NotBandLimited { remainder });
    }
    let max_two_j = h0.max_two_j(1e-12);
    if max_two_j > options.two_j_cap {
        return Err(Error::ModeCapExceeded {
            two_j: max_two_j,
            two_j_cap: options.two_j_cap,
        });
    }

    // Energy expectation is conserved exactly; compute it once.
    let volume = grid.haar_volume();
    let mut weight_sum = 0.0;
    let mut energy_sum = 0.0;
    for (two_j, _, _, a) in h0.iter() {
        let w = a.norm_sqr() * volume / (two_j as f64 + 1.0);
        weight_sum += w;
        energy_sum += w * rotor_energy(two_j, params);
    }
    let energy = energy_sum / weight_sum;

    let hbar = params.hbar;
    let sample_every = options.sample_every.max(1);
    let mut out = Vec::new();
    for step in 0..=steps {
        let t = initial.time + step as f64 * dt;
        if step % sample_every != 0 && step != steps {
            continue;
        }
        let mut h = h0.clone();
        let elapsed = step as f64 * dt;
        h.scale_per_j(|two_j| C64::from_polar(1.0, -rotor_energy(two_j, params) * elapsed / hbar));
        let values = plan.synthesize(&h);
        let norm = (grid.measure_scale() * grid.inner_product(&values, &values).re).sqrt();

        let mut state = ScalarWavefunction {
            spin: initial.spin,
            grid: Arc::clone(&grid),
            spatial: SpatialGrid::single_point(),
            values: Array4::zeros((1, grid.n_alpha, grid.n_beta, grid.n_gamma)),
            norm_factor: initial.norm_factor,
            time: t,
        };
        state.set_angular(0, &values);
        out.push(DynamicalState {
            state,
            modes: h,
            dt,
            step,
            energy,
            norm,
        });
    }
    Ok(out)
}

/// Residual norms of one refinement level of a Madelung study.
#[derive(Debug, Clone, Serialize)]
pub struct MadelungLevel {
    pub n_beta: usize,
    pub h: f64,
    pub hje: f64,
    pub continuity: f64,
}

/// Convergence report of the Madelung-equivalence check.
#[derive(Debug, Clone, Serialize)]
pub struct MadelungReport {
    pub levels: Vec<MadelungLevel>,
    /// Fitted order of the HJE residual vs `h = 1/n_beta`; `None` at floor.
    pub hje_order: Option<f64>,
    /// Fitted order of the continuity residual; `None` at floor.
    pub continuity_order: Option<f64>,
    /// True when every residual sits at rounding level (< 1e-12).
    pub at_rounding_floor: bool,
}

/// Least-squares slope of `ln e` against `ln h`.
fn fit_order(hs: &[f64], es: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.max(1e-300).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}

const ROUNDING_FLOOR: f64 = 1e-12;

/// Fits convergence orders of both residuals over runs at different grid
/// refinements (each run produced by [`evolve`] on its own grid, same state
/// and times). Needs at least 3 levels.
pub fn madelung_report(
    runs: &[Vec<DynamicalState>],
    params: &PhysicalParameters,
) -> Result<MadelungReport> {
    if runs.len() < 3 {
        return Err(Error::InsufficientLevels {
            got: runs.len(),
            need: 3,
        });
    }
    let mut levels = Vec::new();
    for run in runs {
        if run.is_empty() {
            return Err(Error::InsufficientLevels { got: 0, need: 1 });
        }
        let grid = Arc::clone(&run[0].state.grid);
        let plan = SpectralPlan::new(Arc::clone(&grid));
        let mut hje_acc: f64 = 0.0;
        let mut cont_acc: f64 = 0.0;
        for state in run {
            let fields =
                PolarFields::from_state_exact(state, &plan, params)?;
            hje_acc = hje_acc.max(hje_residual(&fields, &plan, params)?);
            cont_acc = cont_acc.max(continuity_residual(&fields, &plan, params)?);
        }
        levels.push(MadelungLevel {
            n_beta: grid.n_beta,
            h: 1.0 / grid.n_beta as f64,
            hje: hje_acc,
            continuity: cont_acc,
        });
    }
    let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let hjes: Vec<f64> = levels.iter().map(|l| l.hje).collect();
    let conts: Vec<f64> = levels.iter().map(|l| l.continuity).collect();
    let floor = hjes.iter().chain(&conts).all(|&e| e < ROUNDING_FLOOR);
    let report = MadelungReport {
        hje_order: (!floor).then(|| fit_order(&hs, &hjes)),
        continuity_order: (!floor).then(|| fit_order(&hs, &conts)),
        at_rounding_floor: floor,
        levels,
    };
    Ok(report)
}

/// Residual norms at one interior sample of a run, with central-difference
/// time derivatives; measures the `O(dt^2)` axis of the Madelung check.
pub fn residuals_central_dt(
    run: &[DynamicalState],
    mid_index: usize,
    params: &PhysicalParameters,
) -> Result<(f64, f64)> {
    if mid_index == 0 || mid_index + 1 >= run.len() {
        return Err(Error::InvalidParameters {
            reason: format!(
                "mid_index = {mid_index} needs neighbours in a run of {} samples",
                run.len()
            ),
        });
    }
    let plan = SpectralPlan::new(Arc::clone(&run[mid_index].state.grid));
    let fields = PolarFields::from_state_triplet(
        &run[mid_index - 1],
        &run[mid_index],
        &run[mid_index + 1],
        &plan,
        params,
    )?;
    Ok((
        hje_residual(&fields, &plan, params)?,
        continuity_residual(&fields, &plan, params)?,
    ))
}
