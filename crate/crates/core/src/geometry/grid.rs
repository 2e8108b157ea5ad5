//! Product quadrature grids on SO(3) with Haar-measure weights.
//!
//! Uniform (trapezoidal) nodes in `alpha` and `gamma`, Gauss-Legendre nodes
//! in `cos(beta)`. The Gauss nodes are interior, so the chart singularities
//! at `beta = 0, pi` never appear on a grid.

use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::EulerAngles;
use crate::error::{Error, Result};
use crate::params::PhysicalParameters;
use crate::C64;

/// Period of the `gamma` coordinate: `2*pi` on SO(3) proper, `4*pi` on the
/// double cover needed for half-integer spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaPeriod {
    #[serde(rename = "2pi")]
    TwoPi,
    #[serde(rename = "4pi")]
    FourPi,
}

impl GammaPeriod {
    pub fn length(&self) -> f64 {
        match self {
            GammaPeriod::TwoPi => 2.0 * PI,
            GammaPeriod::FourPi => 4.0 * PI,
        }
    }

    /// Haar volume of the chart: `8*pi^2` or `16*pi^2`.
    pub fn haar_volume(&self) -> f64 {
        4.0 * PI * self.length()
    }

    /// The natural period for a given spin: the double cover whenever `2s` is odd.
    pub fn for_two_s(two_s: i32) -> Self {
        if two_s % 2 != 0 {
            GammaPeriod::FourPi
        } else {
            GammaPeriod::TwoPi
        }
    }
}

/// Grid configuration as accepted from config documents.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub n_gamma: usize,
    pub gamma_period: GammaPeriod,
    pub params: PhysicalParameters,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on `P_n`; converges to machine precision in a handful of
/// steps for any desk-scale `n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn_prev = if n == 1 { 1.0 } else { p0 };
            let dpn = n as f64 * (x * pn - pn_prev) / (x * x - 1.0);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // Recompute derivative at the converged node for the weight.
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let pn_prev = if n == 1 { 1.0 } else { p0 };
        let pn = if n == 1 { x } else { p1 };
        let dpn = n as f64 * (x * pn - pn_prev) / (x * x - 1.0);
        nodes[n - 1 - i] = x; // initial guesses run from +1 down; store ascending
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
    }
    (nodes, weights)
}

/// Product quadrature grid over `(alpha, beta, gamma)`.
///
/// Node `(ia, ib, ic)` sits at `(alpha_ia, beta_ib, gamma_ic)` with Haar
/// weight `w = (2*pi/N_a) * w_GL(ib) * (P/N_g)`; the Gauss-Legendre weight is
/// taken in `x = cos(beta)`, so `sin(beta) d beta` is built in. Weights sum to
/// the Haar volume of the chart exactly (up to roundoff).
#[derive(Debug, Clone)]
pub struct So3Grid {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub n_gamma: usize,
    pub period: GammaPeriod,
    /// Giration radius bound to this grid; `sqrt(det g) = a^3 sin(beta)`.
    pub giration_radius: f64,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    cos_betas: Vec<f64>,
    gammas: Vec<f64>,
    beta_weights: Vec<f64>,
    alpha_weight: f64,
    gamma_weight: f64,
}

impl So3Grid {
    pub fn new(
        n_alpha: usize,
        n_beta: usize,
        n_gamma: usize,
        period: GammaPeriod,
        params: &PhysicalParameters,
    ) -> Result<Self> {
        if n_alpha < 1 || n_beta < 1 || n_gamma < 1 {
            return Err(Error::ResolutionTooLow {
                detail: format!("grid {n_alpha}x{n_beta}x{n_gamma} has an empty axis"),
            });
        }
        let (x, w) = gauss_legendre(n_beta);
        // x ascending corresponds to beta descending; store beta ascending.
        let mut betas: Vec<f64> = x.iter().rev().map(|&xi| xi.acos()).collect();
        let cos_betas: Vec<f64> = betas.iter().map(|b| b.cos()).collect();
        let beta_weights: Vec<f64> = w.iter().rev().copied().collect();
        // acos is monotone; enforce strictly ascending order for sanity.
        betas.sort_by(|p, q| p.partial_cmp(q).unwrap());

        let alphas = (0..n_alpha)
            .map(|i| 2.0 * PI * i as f64 / n_alpha as f64)
            .collect();
        let len = period.length();
        let gammas = (0..n_gamma)
            .map(|i| len * i as f64 / n_gamma as f64)
            .collect();

        Ok(Self {
            n_alpha,
            n_beta,
            n_gamma,
            period,
            giration_radius: params.giration_radius,
            alphas,
            betas,
            cos_betas,
            gammas,
            beta_weights,
            alpha_weight: 2.0 * PI / n_alpha as f64,
            gamma_weight: len / n_gamma as f64,
        })
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(
            spec.n_alpha,
            spec.n_beta,
            spec.n_gamma,
            spec.gamma_period,
            &spec.params,
        )
    }

    pub fn len(&self) -> usize {
        self.n_alpha * self.n_beta * self.n_gamma
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_alpha, self.n_beta, self.n_gamma)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn cos_betas(&self) -> &[f64] {
        &self.cos_betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn beta_weights(&self) -> &[f64] {
        &self.beta_weights
    }

    pub fn node(&self, ia: usize, ib: usize, ic: usize) -> EulerAngles {
        EulerAngles {
            alpha: self.alphas[ia],
            beta: self.betas[ib],
            gamma: self.gammas[ic],
        }
    }

    /// Haar weight of node `(ia, ib, ic)`.
    pub fn weight(&self, _ia: usize, ib: usize, _ic: usize) -> f64 {
        self.alpha_weight * self.beta_weights[ib] * self.gamma_weight
    }

    /// `sqrt(det g) = a^3 sin(beta)` at beta-index `ib`.
    pub fn sqrt_det_g(&self, ib: usize) -> f64 {
        self.giration_radius.powi(3) * self.betas[ib].sin()
    }

    /// Haar volume of the chart: `8*pi^2` or `16*pi^2`.
    pub fn haar_volume(&self) -> f64 {
        self.period.haar_volume()
    }

    /// Scale factor `a^3` turning Haar integrals into `sqrt(g)`-measure ones.
    pub fn measure_scale(&self) -> f64 {
        self.giration_radius.powi(3)
    }

    pub fn weight_sum(&self) -> f64 {
        let mut total = 0.0;
        for ib in 0..self.n_beta {
            total += self.beta_weights[ib];
        }
        total * self.alpha_weight * self.gamma_weight * (self.n_alpha * self.n_gamma) as f64
    }

    /// Haar-quadrature integral of a complex field sampled on this grid.
    pub fn integrate(&self, field: &Array3<C64>) -> C64 {
        self.check_field(field).expect("field/grid shape mismatch");
        let mut total = C64::new(0.0, 0.0);
        for ia in 0..self.n_alpha {
            for ib in 0..self.n_beta {
                let w = self.weight(ia, ib, 0);
                for ic in 0..self.n_gamma {
                    total += w * field[(ia, ib, ic)];
                }
            }
        }
        total
    }

    /// Haar inner product `<f, g> = sum w conj(f) g`.
    pub fn inner_product(&self, f: &Array3<C64>, g: &Array3<C64>) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for ia in 0..self.n_alpha {
            for ib in 0..self.n_beta {
                let w = self.weight(ia, ib, 0);
                for ic in 0..self.n_gamma {
                    total += w * f[(ia, ib, ic)].conj() * g[(ia, ib, ic)];
                }
            }
        }
        total
    }

    /// Haar-weighted L2 norm.
    pub fn norm(&self, f: &Array3<C64>) -> f64 {
        self.inner_product(f, f).re.max(0.0).sqrt()
    }

    /// Volume-normalized RMS of a real field: `sqrt(sum w f^2 / sum w)`.
    pub fn rms(&self, f: &Array3<f64>) -> f64 {
        let mut total = 0.0;
        for ia in 0..self.n_alpha {
            for ib in 0..self.n_beta {
                let w = self.weight(ia, ib, 0);
                for ic in 0..self.n_gamma {
                    total += w * f[(ia, ib, ic)] * f[(ia, ib, ic)];
                }
            }
        }
        (total / self.weight_sum()).sqrt()
    }

    pub fn check_field(&self, field: &Array3<C64>) -> Result<()> {
        if field.dim() != self.shape() {
            return Err(Error::GridMismatch {
                detail: format!(
                    "field shape {:?} does not match grid {:?}",
                    field.dim(),
                    self.shape()
                ),
            });
        }
        Ok(())
    }

    pub fn zeros(&self) -> Array3<C64> {
        Array3::zeros(self.shape())
    }

    /// Samples a closure over all nodes into a field.
    pub fn sample(&self, mut f: impl FnMut(&EulerAngles) -> C64) -> Array3<C64> {
        let mut out = self.zeros();
        for ia in 0..self.n_alpha {
            for ib in 0..self.n_beta {
                for ic in 0..self.n_gamma {
                    out[(ia, ib, ic)] = f(&self.node(ia, ib, ic));
                }
            }
        }
        out
    }

    /// CSV export: one row per node with angles, Haar weight and `sqrt(det g)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "alpha,beta,gamma,weight,sqrt_det_g")?;
        for ia in 0..self.n_alpha {
            for ib in 0..self.n_beta {
                for ic in 0..self.n_gamma {
                    let n = self.node(ia, ib, ic);
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        n.alpha,
                        n.beta,
                        n.gamma,
                        self.weight(ia, ib, ic),
                        self.sqrt_det_g(ib)
                    )?;
                }
            }
        }
        Ok(())
    }
}
