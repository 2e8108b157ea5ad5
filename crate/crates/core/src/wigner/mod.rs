//! Wigner d- and D-matrices for integer and half-integer spin.
//!
//! Convention (fixed once, every downstream sign follows from it):
//!
//! - `d^j_{m'm}(beta) = <j m'| exp(-i beta J_y) |j m>`, real orthogonal,
//!   `d(0) = 1`;
//! - `D^j_{m'm}(alpha, beta, gamma) = exp(-i m' alpha) d^j_{m'm}(beta) exp(-i m gamma)`;
//! - matrix rows and columns are ordered by *descending* projection,
//!   row 0 = `m' = +j`.
//!
//! For spin 1/2 this gives `d = [[cos(b/2), -sin(b/2)], [sin(b/2), cos(b/2)]]`
//! and the boost-expansion coefficients
//! `c_sigma(alpha, beta) = e^{i sigma alpha} d^s_{sigma, s}(beta)`, i.e.
//! `c_{+1/2} = e^{i alpha/2} cos(beta/2)` and
//! `c_{-1/2} = e^{-i alpha/2} sin(beta/2)`.
//!
//! Spins are stored as `2s` integers so half-integers are exact; the explicit
//! sum evaluator is capped at `2s <= 20`.

pub mod tables;

use std::f64::consts::PI;

use ndarray::Array2;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EulerAngles;
use crate::C64;

/// Largest supported `2s` for the public matrix API.
pub const TWO_S_MAX: i32 = 20;

/// Spin quantum number stored as `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinLabel {
    two_s: i32,
}

impl SpinLabel {
    pub fn new(two_s: i32) -> Result<Self> {
        if two_s < 0 {
            return Err(Error::InvalidParameters {
                reason: format!("2s = {two_s} must be non-negative"),
            });
        }
        if two_s > TWO_S_MAX {
            return Err(Error::SpinTooLarge {
                two_s,
                two_s_max: TWO_S_MAX,
            });
        }
        Ok(Self { two_s })
    }

    pub fn two_s(&self) -> i32 {
        self.two_s
    }

    pub fn spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    /// Number of projections, `2s + 1`.
    pub fn dim(&self) -> usize {
        (self.two_s + 1) as usize
    }

    pub fn is_half_integer(&self) -> bool {
        self.two_s % 2 != 0
    }

    /// Projections `2*sigma` in descending order, `+2s, +2s-2, ..., -2s`.
    pub fn projections_desc(&self) -> impl Iterator<Item = i32> + '_ {
        let two_s = self.two_s;
        (0..self.dim()).map(move |r| two_s - 2 * r as i32)
    }

    /// Row index of projection `2*sigma` in the descending ordering.
    pub fn row_of(&self, two_sigma: i32) -> Result<usize> {
        if two_sigma.abs() > self.two_s || (two_sigma - self.two_s) % 2 != 0 {
            return Err(Error::InvalidProjection {
                two_s: self.two_s,
                two_sigma,
            });
        }
        Ok(((self.two_s - two_sigma) / 2) as usize)
    }

    /// Projection `2*sigma` at a given row index.
    pub fn two_sigma_at(&self, row: usize) -> i32 {
        self.two_s - 2 * row as i32
    }
}

static LN_FACTORIAL: Lazy<Vec<f64>> = Lazy::new(|| {
    let mut t = vec![0.0; 257];
    for n in 1..t.len() {
        t[n] = t[n - 1] + (n as f64).ln();
    }
    t
});

fn ln_factorial(n: i32) -> f64 {
    LN_FACTORIAL[n as usize]
}

/// Single element `d^j_{m'm}(beta)` by the explicit Wigner sum with
/// prefactored log-factorials. Arguments are doubled: `two_j`, `two_mp = 2m'`,
/// `two_m = 2m`.
///
/// Accurate to ~1e-13 for `2j` up to a few tens; the alternating sum loses
/// digits slowly as `j` grows, which is why [`TWO_S_MAX`] caps the public API.
pub fn d_element(two_j: i32, two_mp: i32, two_m: i32, beta: f64) -> f64 {
    debug_assert!(two_j >= 0);
    debug_assert!(two_mp.abs() <= two_j && (two_j - two_mp) % 2 == 0);
    debug_assert!(two_m.abs() <= two_j && (two_j - two_m) % 2 == 0);

    let jpm = (two_j + two_m) / 2; // j + m
    let jmm = (two_j - two_m) / 2; // j - m
    let jpmp = (two_j + two_mp) / 2; // j + m'
    let jmmp = (two_j - two_mp) / 2; // j - m'
    let mp_minus_m = (two_mp - two_m) / 2; // m' - m, an integer

    let ln_pref = 0.5
        * (ln_factorial(jpmp) + ln_factorial(jmmp) + ln_factorial(jpm) + ln_factorial(jmm));

    let (c, s) = {
        let half = beta / 2.0;
        (half.cos(), half.sin())
    };

    let t_min = 0.max(-mp_minus_m);
    let t_max = jpm.min(jmmp);
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let p_cos = two_j + (two_m - two_mp) / 2 - 2 * t; // 2j + m - m' - 2t
        let p_sin = mp_minus_m + 2 * t;
        let ln_den = ln_factorial(jpm - t)
            + ln_factorial(t)
            + ln_factorial(mp_minus_m + t)
            + ln_factorial(jmmp - t);
        let mut term = (ln_pref - ln_den).exp();
        term *= pow_i(c, p_cos) * pow_i(s, p_sin);
        if (mp_minus_m + t) % 2 != 0 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    sum
}

fn pow_i(base: f64, exp: i32) -> f64 {
    debug_assert!(exp >= 0);
    base.powi(exp)
}

/// A d- or D-matrix together with the spin and angles that built it.
#[derive(Debug, Clone)]
pub struct WignerMatrix {
    pub spin: SpinLabel,
    pub angles: EulerAngles,
    /// `(2s+1) x (2s+1)`, rows/columns in descending projection order.
    pub entries: Array2<C64>,
}

impl WignerMatrix {
    pub fn entry(&self, two_mp: i32, two_m: i32) -> Result<C64> {
        let r = self.spin.row_of(two_mp)?;
        let c = self.spin.row_of(two_m)?;
        Ok(self.entries[(r, c)])
    }

    /// `max |M M^dag - 1|`, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.spin.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entries[(r, k)] * self.entries[(c, k)].conj();
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }
}

/// Reduced rotation matrix `d^s(beta) = D^s(0, beta, 0)`, real orthogonal.
pub fn small_d(spin: SpinLabel, beta: f64) -> WignerMatrix {
    let n = spin.dim();
    let mut entries = Array2::zeros((n, n));
    for r in 0..n {
        let two_mp = spin.two_sigma_at(r);
        for c in 0..n {
            let two_m = spin.two_sigma_at(c);
            entries[(r, c)] = C64::new(d_element(spin.two_s, two_mp, two_m, beta), 0.0);
        }
    }
    WignerMatrix {
        spin,
        angles: EulerAngles {
            alpha: 0.0,
            beta,
            gamma: 0.0,
        },
        entries,
    }
}

/// Reduction of `(alpha, gamma)` when the rotation is a central element
/// (identity or the 2*pi turn): returns `Some(sign_exponent)` with the parity
/// of the number of 2*pi turns.
fn central_element(angles: &EulerAngles) -> Option<i32> {
    if angles.beta != 0.0 {
        return None;
    }
    let total = (angles.alpha + angles.gamma).rem_euclid(4.0 * PI);
    if total == 0.0 {
        Some(0)
    } else if total == 2.0 * PI {
        Some(1)
    } else {
        None
    }
}

/// Full rotation matrix `D^s(alpha, beta, gamma)`.
///
/// `gamma` is honored on the 4*pi cover, so a bare `2*pi` turn yields exactly
/// `(-1)^{2s} * 1` (the central element is special-cased to keep the parity
/// exact rather than accurate to roundoff).
pub fn big_d(spin: SpinLabel, angles: &EulerAngles) -> WignerMatrix {
    let n = spin.dim();
    let mut entries = Array2::zeros((n, n));

    if let Some(turns) = central_element(angles) {
        let sign = if (spin.two_s * turns) % 2 != 0 {
            -1.0
        } else {
            1.0
        };
        for r in 0..n {
            entries[(r, r)] = C64::new(sign, 0.0);
        }
        return WignerMatrix {
            spin,
            angles: *angles,
            entries,
        };
    }

    for r in 0..n {
        let two_mp = spin.two_sigma_at(r);
        let mp = two_mp as f64 / 2.0;
        let phase_a = C64::from_polar(1.0, -mp * angles.alpha);
        for c in 0..n {
            let two_m = spin.two_sigma_at(c);
            let m = two_m as f64 / 2.0;
            let phase_g = C64::from_polar(1.0, -m * angles.gamma);
            let d = d_element(spin.two_s, two_mp, two_m, angles.beta);
            entries[(r, c)] = phase_a * d * phase_g;
        }
    }
    WignerMatrix {
        spin,
        angles: *angles,
        entries,
    }
}

/// Boost-expansion coefficient `c_sigma(alpha, beta) = e^{i sigma alpha} d^s_{sigma, s}(beta)`,
/// the conjugate of the `(sigma, s)` entry of `D^s(alpha, beta, 0)`.
pub fn coefficient_c(spin: SpinLabel, two_sigma: i32, alpha: f64, beta: f64) -> Result<C64> {
    spin.row_of(two_sigma)?;
    let sigma = two_sigma as f64 / 2.0;
    let d = d_element(spin.two_s, two_sigma, spin.two_s, beta);
    Ok(C64::from_polar(1.0, sigma * alpha) * d)
}
