//! Two-particle exchange kinematics under the monotone-gamma constraint and
//! the N-particle (anti)symmetrizer.
//!
//! The rotation group factors as `R(alpha, beta, gamma) = B(alpha, beta) R_z(gamma)`
//! with the boost `B = R_z(alpha) R_y(beta)` carrying the lab z-axis to the
//! body axis. Exchanging the orientations of two particles happens through
//! `R_{a->b} = B_b R_z(gamma_b - gamma_a) B_a^{-1}`; since only
//! counter-clockwise proper rotation is admissible (`dgamma/dt >= 0`), the
//! two gamma increments of a completed exchange always add up to exactly
//! `2*pi`, the composite rotation is the identity matrix, and the scalar
//! wavefunction picks up `exp(2*pi*i*s) = (-1)^{2s}`.
//!
//! Permutations act through transpositions: `k_p` exchanges increment the
//! action by `2*pi*k_p*hbar*s` and multiply the wavefunction by
//! `(-1)^{2s k_p}`, which forces the spinor of Eq-type product states into the
//! fully (anti)symmetric class realized by [`symmetrize`].

use std::f64::consts::PI;

use nalgebra::{Matrix3, Unit, Vector3};
use ndarray::{Array2, ArrayD, IxDyn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::EulerAngles;
use crate::params::PhysicalParameters;
use crate::wigner::SpinLabel;
use crate::C64;

/// A proper rotation as a 3x3 orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationOp {
    pub matrix: Matrix3<f64>,
}

impl RotationOp {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    pub fn rot_z(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            matrix: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        }
    }

    pub fn rot_y(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            matrix: Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        }
    }

    /// Rodrigues rotation about an arbitrary axis.
    pub fn about_axis(axis: &Unit<Vector3<f64>>, theta: f64) -> Self {
        Self {
            matrix: nalgebra::Rotation3::from_axis_angle(axis, theta)
                .matrix()
                .to_owned(),
        }
    }

    /// `R(alpha, beta, gamma) = R_z(alpha) R_y(beta) R_z(gamma)`.
    pub fn from_euler(angles: &EulerAngles) -> Self {
        Self::rot_z(angles.alpha) * Self::rot_y(angles.beta) * Self::rot_z(angles.gamma)
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    /// Deviation from the proper orthogonal group: `max(|R R^T - 1|, |det - 1|)`.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.matrix * self.matrix.transpose() - Matrix3::identity();
        gram.abs().max().max((self.matrix.determinant() - 1.0).abs())
    }

    /// z-y-z Euler angles with `gamma` in `[0, 2*pi)`.
    pub fn euler_angles(&self) -> EulerAngles {
        let m = &self.matrix;
        let cos_b = m[(2, 2)].clamp(-1.0, 1.0);
        let sin_b = (m[(0, 2)] * m[(0, 2)] + m[(1, 2)] * m[(1, 2)]).sqrt();
        if sin_b > 1e-12 {
            let alpha = m[(1, 2)].atan2(m[(0, 2)]);
            let gamma = m[(2, 1)].atan2(-m[(2, 0)]);
            EulerAngles::new(alpha, cos_b.acos(), gamma)
        } else if cos_b > 0.0 {
            // R = R_z(alpha + gamma)
            EulerAngles::new(m[(1, 0)].atan2(m[(0, 0)]), 0.0, 0.0)
        } else {
            // beta = pi: R determines alpha - gamma only
            EulerAngles::new((-m[(1, 0)]).atan2(-m[(0, 0)]), PI, 0.0)
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.matrix - other.matrix).abs().max()
    }
}

impl std::ops::Mul for RotationOp {
    type Output = RotationOp;
    fn mul(self, rhs: RotationOp) -> RotationOp {
        RotationOp {
            matrix: self.matrix * rhs.matrix,
        }
    }
}

impl std::ops::Mul for &RotationOp {
    type Output = RotationOp;
    fn mul(self, rhs: &RotationOp) -> RotationOp {
        RotationOp {
            matrix: self.matrix * rhs.matrix,
        }
    }
}

/// Boost `B(alpha, beta) = R(alpha, beta, 0) = R_z(alpha) R_y(beta)`: carries
/// the lab z-axis to the direction `(alpha, beta)` with no rotation about it.
pub fn boost(alpha: f64, beta: f64) -> RotationOp {
    RotationOp::rot_z(alpha) * RotationOp::rot_y(beta)
}

/// The two exchange rotations
/// `R_{a->b} = B(alpha_b, beta_b) R_z(gamma_b - gamma_a) B^{-1}(alpha_a, beta_a)`
/// and its mirror: applying the first to frame `a` gives frame `b`'s
/// orientation and vice versa.
pub fn exchange_rotations(
    frame_a: &EulerAngles,
    frame_b: &EulerAngles,
) -> (RotationOp, RotationOp) {
    let b_a = boost(frame_a.alpha, frame_a.beta);
    let b_b = boost(frame_b.alpha, frame_b.beta);
    let r_ab = &b_b * &RotationOp::rot_z(frame_b.gamma - frame_a.gamma) * b_a.inverse();
    let r_ba = &b_a * &RotationOp::rot_z(frame_a.gamma - frame_b.gamma) * b_b.inverse();
    (r_ab, r_ba)
}

/// Discretized monotone exchange of two gamma angles.
///
/// Particle `a` rotates counter-clockwise from `gamma_a` to `gamma_b` (adding
/// `2*pi` when needed), particle `b` completes the turn to `gamma_a + 2*pi`,
/// so the increments always satisfy `Dgamma_a + Dgamma_b = 2*pi`. When the
/// angles coincide the tie-break gives particle `a` the zero increment.
#[derive(Debug, Clone, Serialize)]
pub struct ExchangePath {
    /// Particle indices `(a, b)`.
    pub indices: (usize, usize),
    pub initial_a: EulerAngles,
    pub initial_b: EulerAngles,
    pub final_a: EulerAngles,
    pub final_b: EulerAngles,
    /// Raw (unreduced) gamma trajectories; winding is visible in the values.
    pub gamma_a_path: Vec<f64>,
    pub gamma_b_path: Vec<f64>,
    pub delta_gamma_a: f64,
    pub delta_gamma_b: f64,
}

impl ExchangePath {
    /// Exchange of the full frames; positions are irrelevant for the angles.
    pub fn between_frames(frame_a: &EulerAngles, frame_b: &EulerAngles, samples: usize) -> Self {
        let samples = samples.max(2);
        let delta_a = (frame_b.gamma - frame_a.gamma).rem_euclid(2.0 * PI);
        let delta_b = 2.0 * PI - delta_a;
        let line = |from: f64, delta: f64| -> Vec<f64> {
            (0..samples)
                .map(|i| from + delta * i as f64 / (samples - 1) as f64)
                .collect()
        };
        ExchangePath {
            indices: (0, 1),
            initial_a: *frame_a,
            initial_b: *frame_b,
            final_a: EulerAngles::new(frame_b.alpha, frame_b.beta, frame_b.gamma),
            final_b: EulerAngles::new(frame_a.alpha, frame_a.beta, frame_a.gamma),
            gamma_a_path: line(frame_a.gamma, delta_a),
            gamma_b_path: line(frame_b.gamma, delta_b),
            delta_gamma_a: delta_a,
            delta_gamma_b: delta_b,
        }
    }

    /// Validates the ratchet constraint and the increment sum rule.
    pub fn validate(&self) -> Result<()> {
        for path in [&self.gamma_a_path, &self.gamma_b_path] {
            if path.len() < 2 {
                return Err(Error::InvalidPath {
                    reason: "path needs at least 2 samples".into(),
                });
            }
            for w in path.windows(2) {
                if w[1] - w[0] < -1e-12 {
                    return Err(Error::InvalidPath {
                        reason: format!("gamma decreases: {} -> {}", w[0], w[1]),
                    });
                }
            }
        }
        let sum = self.delta_gamma_a + self.delta_gamma_b;
        if (sum - 2.0 * PI).abs() > 1e-12 {
            return Err(Error::InvalidPath {
                reason: format!("Dgamma_a + Dgamma_b = {sum} differs from 2*pi"),
            });
        }
        let end_a = self.gamma_a_path.last().unwrap() - self.gamma_a_path[0];
        let end_b = self.gamma_b_path.last().unwrap() - self.gamma_b_path[0];
        if (end_a - self.delta_gamma_a).abs() > 1e-12 || (end_b - self.delta_gamma_b).abs() > 1e-12
        {
            return Err(Error::InvalidPath {
                reason: "trajectory endpoints disagree with recorded increments".into(),
            });
        }
        Ok(())
    }

    /// Smallest signed discrete `dgamma` over both trajectories.
    pub fn min_increment(&self) -> f64 {
        let mut min = f64::INFINITY;
        for path in [&self.gamma_a_path, &self.gamma_b_path] {
            for w in path.windows(2) {
                min = min.min(w[1] - w[0]);
            }
        }
        min
    }
}

/// Monotone exchange path between two gamma angles (alpha = beta = 0 frames).
pub fn monotone_exchange_path(gamma_a: f64, gamma_b: f64, samples: usize) -> ExchangePath {
    ExchangePath::between_frames(
        &EulerAngles::new(0.0, 0.0, gamma_a),
        &EulerAngles::new(0.0, 0.0, gamma_b),
        samples,
    )
}

/// Exchange phase `exp(i s (Dgamma_a + Dgamma_b)) = exp(2*pi*i*s) = (-1)^{2s}`,
/// exact by the parity of `2s`.
pub fn exchange_phase(spin: SpinLabel, path: &ExchangePath) -> Result<C64> {
    path.validate()?;
    let sign = if spin.two_s() % 2 == 0 { 1.0 } else { -1.0 };
    Ok(C64::new(sign, 0.0))
}

/// Everything an exchange produces: increments, operators, action increment
/// and phase, plus the monotonicity audit.
#[derive(Debug, Clone, Serialize)]
pub struct ExchangeRecord {
    pub two_s: i32,
    pub delta_gamma_a: f64,
    pub delta_gamma_b: f64,
    pub delta_gamma_sum: f64,
    pub rotation_ab: [[f64; 3]; 3],
    pub rotation_ba: [[f64; 3]; 3],
    /// `max |R_{a<->b} - 1|`; the composite is the identity matrix.
    pub composite_identity_defect: f64,
    /// Smallest discrete gamma step along the paths (ratchet audit).
    pub min_gamma_increment: f64,
    /// Action increment `Delta S = 2 pi hbar s` of the completed exchange.
    pub delta_action: f64,
    /// The resulting phase, exactly +1 or -1.
    pub phase: f64,
}

/// Runs one full two-particle exchange and collects the record.
pub fn exchange_record(
    spin: SpinLabel,
    frame_a: &EulerAngles,
    frame_b: &EulerAngles,
    samples: usize,
    params: &PhysicalParameters,
) -> Result<ExchangeRecord> {
    let path = ExchangePath::between_frames(frame_a, frame_b, samples);
    let phase = exchange_phase(spin, &path)?;
    let (r_ab, r_ba) = exchange_rotations(frame_a, frame_b);
    let composite = &r_ab * &r_ba;
    let to_rows = |r: &RotationOp| {
        let m = &r.matrix;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    };
    Ok(ExchangeRecord {
        two_s: spin.two_s(),
        delta_gamma_a: path.delta_gamma_a,
        delta_gamma_b: path.delta_gamma_b,
        delta_gamma_sum: path.delta_gamma_a + path.delta_gamma_b,
        rotation_ab: to_rows(&r_ab),
        rotation_ba: to_rows(&r_ba),
        composite_identity_defect: composite.max_diff(&RotationOp::identity()),
        min_gamma_increment: path.min_increment(),
        delta_action: 2.0 * PI * params.hbar * spin.spin(),
        phase: phase.re,
    })
}

/// A permutation together with a transposition decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct PermutationRecord {
    /// `permutation[i]` is the image of `i`.
    pub permutation: Vec<usize>,
    pub transpositions: Vec<(usize, usize)>,
    pub transposition_count: usize,
    /// `(-1)^{k_p}`.
    pub parity: i32,
}

impl PermutationRecord {
    /// Decomposes via cycles: a cycle of length L contributes L-1
    /// transpositions.
    pub fn new(permutation: Vec<usize>) -> Result<Self> {
        let n = permutation.len();
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameters {
                    reason: format!("{permutation:?} is not a permutation"),
                });
            }
            seen[p] = true;
        }
        let mut transpositions = Vec::new();
        let mut visited = vec![false; n];
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut next = permutation[start];
            while next != start {
                visited[next] = true;
                cycle.push(next);
                next = permutation[next];
            }
            // (c0 c1 ... cL) = (c0 cL)(c0 cL-1)...(c0 c1)
            for i in (1..cycle.len()).rev() {
                transpositions.push((cycle[0], cycle[i]));
            }
        }
        let count = transpositions.len();
        let record = Self {
            permutation,
            transpositions,
            transposition_count: count,
            parity: if count % 2 == 0 { 1 } else { -1 },
        };
        debug_assert!(record.composition_check());
        Ok(record)
    }

    /// An alternative decomposition by adjacent-swap sorting; used to check
    /// that phases do not depend on the decomposition chosen.
    pub fn bubble_decomposition(&self) -> Vec<(usize, usize)> {
        let mut arr = self.permutation.clone();
        let n = arr.len();
        let mut swaps = Vec::new();
        for i in 0..n {
            for j in 0..n - 1 - i {
                if arr[j] > arr[j + 1] {
                    arr.swap(j, j + 1);
                    swaps.push((j, j + 1));
                }
            }
        }
        swaps
    }

    /// Confirms that the stored transpositions compose to the permutation.
    pub fn composition_check(&self) -> bool {
        let n = self.permutation.len();
        let mut composed: Vec<usize> = (0..n).collect();
        // Apply right-to-left: p = t_1 t_2 ... t_k acting on points.
        for &(i, j) in self.transpositions.iter().rev() {
            composed = composed
                .iter()
                .map(|&x| {
                    if x == i {
                        j
                    } else if x == j {
                        i
                    } else {
                        x
                    }
                })
                .collect();
        }
        composed == self.permutation
    }

    /// Independent sign via cycle counting: `sign = (-1)^{n - #cycles}`.
    pub fn sign_by_cycles(&self) -> i32 {
        let n = self.permutation.len();
        let mut visited = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            cycles += 1;
            let mut next = start;
            while !visited[next] {
                visited[next] = true;
                next = self.permutation[next];
            }
        }
        if (n - cycles) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Action increment and phase of a permutation applied through `k_p`
/// pairwise monotone exchanges: `Delta S = 2 pi k_p hbar s`, phase
/// `(-1)^{2s k_p}`.
pub fn permutation_action_increment(
    spin: SpinLabel,
    perm: &PermutationRecord,
    params: &PhysicalParameters,
) -> (f64, C64) {
    let k = perm.transposition_count;
    let delta_action = 2.0 * PI * k as f64 * params.hbar * spin.spin();
    let phase = if (spin.two_s() as usize * k) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    (delta_action, C64::new(phase, 0.0))
}

/// An N-particle spinor as a rank-N tensor over combined (spin, mode) labels.
#[derive(Debug, Clone)]
pub struct NParticleSpinor {
    pub spin: SpinLabel,
    pub n_particles: usize,
    /// Single-particle dimension `(2s+1) * n_modes`.
    pub dim: usize,
    pub tensor: ArrayD<C64>,
    /// Set when symmetrization annihilated the state (Pauli exclusion).
    pub is_zero: bool,
}

impl NParticleSpinor {
    pub fn norm(&self) -> f64 {
        self.tensor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Applies a slot permutation to a rank-N tensor:
/// `(P psi)[i_0, ..] = psi[i_{p(0)}, ..]`.
pub fn apply_slot_permutation(tensor: &ArrayD<C64>, permutation: &[usize]) -> ArrayD<C64> {
    tensor.clone().permuted_axes(IxDyn(permutation))
}

/// Projects a rank-N tensor onto the symmetry class of spin `s`:
/// `P psi = (1/N!) sum_p (-1)^{2s k_p} p[psi]`.
pub fn apply_symmetrizer(tensor: &ArrayD<C64>, spin: SpinLabel) -> ArrayD<C64> {
    let n = tensor.ndim();
    let mut out = ArrayD::zeros(tensor.shape());
    let mut count = 0usize;
    for_each_permutation(n, |perm, parity| {
        let sign = if spin.two_s() % 2 != 0 && parity < 0 {
            -1.0
        } else {
            1.0
        };
        let permuted = apply_slot_permutation(tensor, perm);
        out.zip_mut_with(&permuted, |o, &p| *o += sign * p);
        count += 1;
    });
    out.mapv_inplace(|z| z / count as f64);
    out
}

/// Enumerates all permutations of `0..n` with their signs (Heap's algorithm,
/// deterministic order).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize], i32)) {
    let mut arr: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut parity = 1i32;
    visit(&arr, parity);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                arr.swap(0, i);
            } else {
                arr.swap(c[i], i);
            }
            parity = -parity;
            visit(&arr, parity);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Builds the (anti)symmetrized N-particle spinor from single-particle states.
///
/// Each state is a `(2s+1) x n_modes` array; the combined label flattens spin
/// (descending) and mode. Output is unit-normalized, or flagged zero when the
/// projection annihilates the product (Pauli exclusion for repeated
/// half-integer-spin states).
pub fn symmetrize(states: &[Array2<C64>], spin: SpinLabel) -> Result<NParticleSpinor> {
    let n = states.len();
    if n == 0 || n > 6 {
        return Err(Error::InvalidParameters {
            reason: format!("symmetrize supports 1..=6 particles, got {n}"),
        });
    }
    let n_modes = states[0].ncols();
    for (i, s) in states.iter().enumerate() {
        if s.nrows() != spin.dim() || s.ncols() != n_modes {
            return Err(Error::GridMismatch {
                detail: format!(
                    "state {i} has shape {:?}, expected ({}, {n_modes})",
                    s.dim(),
                    spin.dim()
                ),
            });
        }
    }
    let dim = spin.dim() * n_modes;
    let flat: Vec<Vec<C64>> = states
        .iter()
        .map(|s| s.iter().copied().collect())
        .collect();

    // Product tensor psi[i_0, ..., i_{N-1}] = prod_a states[a][i_a].
    let shape: Vec<usize> = vec![dim; n];
    let mut product = ArrayD::zeros(IxDyn(&shape));
    for (idx, v) in product.indexed_iter_mut() {
        let mut acc = C64::new(1.0, 0.0);
        for a in 0..n {
            acc *= flat[a][idx[a]];
        }
        *v = acc;
    }

    let tensor = apply_symmetrizer(&product, spin);
    let norm = tensor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Ok(NParticleSpinor {
            spin,
            n_particles: n,
            dim,
            tensor: ArrayD::zeros(IxDyn(&shape)),
            is_zero: true,
        });
    }
    Ok(NParticleSpinor {
        spin,
        n_particles: n,
        dim,
        tensor: tensor.mapv(|z| z / norm),
        is_zero: false,
    })
}

/// One trial of the action-symmetry verification.
#[derive(Debug, Clone, Serialize)]
pub struct ActionSymmetryTrial {
    pub permutation: Vec<usize>,
    pub transposition_count: usize,
    pub angular_phase: f64,
    pub spatial_phase: f64,
    pub product: f64,
}

/// Report of [`verify_action_symmetry`].
#[derive(Debug, Clone, Serialize)]
pub struct ActionSymmetryReport {
    pub two_s: i32,
    pub n_particles: usize,
    pub trials: Vec<ActionSymmetryTrial>,
    pub all_compensated: bool,
}

/// Checks that the angular exchange phase of random permutations is exactly
/// compensated by the spatial-permutation eigenvalue of the symmetrized
/// spinor, so the total scalar wavefunction stays permutation invariant.
pub fn verify_action_symmetry(
    spin: SpinLabel,
    n_particles: usize,
    trials: usize,
    seed: u64,
    params: &PhysicalParameters,
) -> Result<ActionSymmetryReport> {
    if n_particles > 6 {
        return Err(Error::InvalidParameters {
            reason: format!("N = {n_particles} exceeds the desk-scale cap of 6"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_modes = n_particles; // enough orthogonal room for fermions
    let dim = spin.dim() * n_modes;

    // Random orthonormal single-particle states by Gram-Schmidt.
    let mut vectors: Vec<Vec<C64>> = Vec::new();
    while vectors.len() < n_particles {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for u in &vectors {
            let overlap: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= overlap * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|z| *z /= norm);
            vectors.push(v);
        }
    }
    let states: Vec<Array2<C64>> = vectors
        .iter()
        .map(|v| Array2::from_shape_vec((spin.dim(), n_modes), v.clone()).expect("shape"))
        .collect();
    let symmetrized = symmetrize(&states, spin)?;

    let mut report_trials = Vec::new();
    let mut all_ok = true;
    for _ in 0..trials {
        let mut perm: Vec<usize> = (0..n_particles).collect();
        perm.shuffle(&mut rng);
        let record = PermutationRecord::new(perm.clone())?;
        let (_, angular) = permutation_action_increment(spin, &record, params);

        let permuted = apply_slot_permutation(&symmetrized.tensor, &perm);
        let overlap: C64 = permuted
            .iter()
            .zip(symmetrized.tensor.iter())
            .map(|(a, b)| b.conj() * a)
            .sum();
        let spatial = overlap.re; // eigenvalue of the permutation, +-1
        let product = angular.re * spatial;
        if (product - 1.0).abs() > 1e-10 {
            all_ok = false;
        }
        report_trials.push(ActionSymmetryTrial {
            permutation: perm,
            transposition_count: record.transposition_count,
            angular_phase: angular.re,
            spatial_phase: spatial,
            product,
        });
    }
    Ok(ActionSymmetryReport {
        two_s: spin.two_s(),
        n_particles,
        trials: report_trials,
        all_compensated: all_ok,
    })
}
