//! Weighted measurement direction sets.
//!
//! A direction set for the label 2s is a list of unit vectors n̂_i with
//! weights c²_i such that the symmetrized product projectors resolve the
//! identity on the (2s+1)-dimensional symmetric subspace of 2s qubits:
//!
//!   Σ_i c²_i P_sym |n̂_i⟩⟨n̂_i|^⊗2s P_sym = I_sym,
//!
//! which forces Σ c²_i = 2s+1 and Σ c²_i n̂_i = 0. Internally the condition
//! is checked in the (2s+1)-dimensional Dicke basis, where |n̂⟩^⊗2s is the
//! spin-coherent state with amplitudes √C(2s,k) α^{2s−k} β^k.
//!
//! Sets for 2s ∈ {1, 2, 3} are classical configurations (antipodal pair,
//! regular tetrahedron, regular octahedron) and are built in. For 2s ∈
//! {4, 5} the sets are produced by a seeded multi-start Levenberg–Marquardt
//! solver and cached, with their residual certificates, in version-controlled
//! data files.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Design-condition tolerance for a set to be considered valid.
pub const DESIGN_TOLERANCE: f64 = 1e-8;
/// Tolerance on the weight-sum and centroid constraints.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-9;
/// Residual a solver run must reach to count as converged.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
/// Default number of deterministic solver restarts.
pub const DEFAULT_RESTARTS: usize = 16;

/// One weighted direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionWeight {
    #[serde(rename = "n")]
    pub direction: [f64; 3],
    pub c_sq: f64,
}

/// A weighted set of directions for the sector label 2s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub twice_s: u32,
    pub entries: Vec<DirectionWeight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DesignCertificate>,
}

/// Residuals recorded alongside a solved set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub design_residual: f64,
    pub weight_sum_error: f64,
    pub centroid_error: f64,
    pub seed: u64,
}

/// Verification report for a direction set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub twice_s: u32,
    pub count: usize,
    /// Max-norm of Σ c² |χ⟩⟨χ| − I on the symmetric subspace.
    pub design_residual: f64,
    /// |Σ c² − (2s+1)|.
    pub weight_sum_error: f64,
    /// ‖Σ c² n̂‖.
    pub centroid_error: f64,
    /// Rank of Σ c² |χ⟩⟨χ| at threshold 1e-8; must equal 2s+1.
    pub gram_rank: usize,
    pub pass: bool,
}

/// Spin-coherent state of 2s qubits along `direction`, in the Dicke basis
/// (component k has k spins down).
pub fn coherent_state(twice_s: u32, direction: [f64; 3]) -> Vec<Complex64> {
    let [x, y, z] = direction;
    let d = twice_s as usize + 1;
    if z <= -1.0 + 1e-14 {
        let mut chi = vec![Complex64::ZERO; d];
        chi[d - 1] = Complex64::ONE;
        return chi;
    }
    let alpha = ((1.0 + z) / 2.0).sqrt();
    let beta = Complex64::new(x, y) / (2.0 * (1.0 + z)).sqrt();
    let mut chi = Vec::with_capacity(d);
    for k in 0..d {
        let b = binomial_f64(twice_s as usize, k).sqrt();
        chi.push(
            Complex64::new(b * alpha.powi((twice_s as usize - k) as i32), 0.0)
                * beta.powi(k as i32),
        );
    }
    chi
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Σ c² |χ⟩⟨χ| over the set, a Hermitian (2s+1)×(2s+1) matrix.
fn gram_operator(set: &DirectionSet) -> DMatrix<Complex64> {
    let d = set.twice_s as usize + 1;
    let mut m = DMatrix::from_element(d, d, Complex64::ZERO);
    for entry in &set.entries {
        let chi = coherent_state(set.twice_s, entry.direction);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += chi[i] * chi[j].conj() * entry.c_sq;
            }
        }
    }
    m
}

/// Checks the design condition, the weight constraints, and the rank.
pub fn verify_direction_set(set: &DirectionSet) -> DesignReport {
    let d = set.twice_s as usize + 1;
    let m = gram_operator(set);
    let mut design_residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { Complex64::ONE } else { Complex64::ZERO };
            design_residual = design_residual.max((m[(i, j)] - target).norm());
        }
    }
    let weight_sum: f64 = set.entries.iter().map(|e| e.c_sq).sum();
    let weight_sum_error = (weight_sum - d as f64).abs();
    let mut centroid = [0.0; 3];
    for e in &set.entries {
        for (c, d) in centroid.iter_mut().zip(e.direction) {
            *c += e.c_sq * d;
        }
    }
    let centroid_error =
        (centroid[0] * centroid[0] + centroid[1] * centroid[1] + centroid[2] * centroid[2]).sqrt();
    let gram_rank = m
        .map(|z| z)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|v| v.abs() > 1e-8)
        .count();
    let pass = design_residual < DESIGN_TOLERANCE
        && weight_sum_error < CONSTRAINT_TOLERANCE
        && centroid_error < CONSTRAINT_TOLERANCE
        && gram_rank == d;
    DesignReport {
        twice_s: set.twice_s,
        count: set.entries.len(),
        design_residual,
        weight_sum_error,
        centroid_error,
        gram_rank,
        pass,
    }
}

/// Built-in sets: antipodal pair (2s=1), regular tetrahedron (2s=2),
/// regular octahedron (2s=3), each with uniform weights (2s+1)/n.
pub fn builtin_direction_set(twice_s: u32) -> Result<DirectionSet> {
    let r3 = 1.0 / 3.0f64.sqrt();
    let entries: Vec<([f64; 3], f64)> = match twice_s {
        1 => vec![([0.0, 0.0, 1.0], 1.0), ([0.0, 0.0, -1.0], 1.0)],
        2 => vec![
            ([r3, r3, r3], 0.75),
            ([r3, -r3, -r3], 0.75),
            ([-r3, r3, -r3], 0.75),
            ([-r3, -r3, r3], 0.75),
        ],
        3 => {
            let w = 2.0 / 3.0;
            vec![
                ([1.0, 0.0, 0.0], w),
                ([-1.0, 0.0, 0.0], w),
                ([0.0, 1.0, 0.0], w),
                ([0.0, -1.0, 0.0], w),
                ([0.0, 0.0, 1.0], w),
                ([0.0, 0.0, -1.0], w),
            ]
        }
        _ => return Err(Error::UnsupportedTwiceS { twice_s }),
    };
    Ok(DirectionSet {
        twice_s,
        entries: entries
            .into_iter()
            .map(|(direction, c_sq)| DirectionWeight { direction, c_sq })
            .collect(),
        certificate: None,
    })
}

const CACHED_2S4: &str = include_str!("../data/design_2s4_n10.json");
const CACHED_2S5: &str = include_str!("../data/design_2s5_n12.json");

static SET_2S4: OnceLock<DirectionSet> = OnceLock::new();
static SET_2S5: OnceLock<DirectionSet> = OnceLock::new();

/// The direction set used for a sector label: built-in for 2s ≤ 3, cached
/// solver output for 2s ∈ {4, 5}.
pub fn direction_set_for(twice_s: u32) -> Result<DirectionSet> {
    match twice_s {
        1..=3 => builtin_direction_set(twice_s),
        4 => Ok(SET_2S4
            .get_or_init(|| serde_json::from_str(CACHED_2S4).expect("bundled 2s=4 set"))
            .clone()),
        5 => Ok(SET_2S5
            .get_or_init(|| serde_json::from_str(CACHED_2S5).expect("bundled 2s=5 set"))
            .clone()),
        _ => Err(Error::MissingDirectionSet { twice_s }),
    }
}

/// Minimal outcome counts for pure-state estimation with 2s copies,
/// n_ps(0) ≡ 1; the counts for 2s ≥ 6 are conjectural and unsupported here.
pub fn pure_state_count(twice_s: u32) -> Option<usize> {
    [1, 2, 4, 6, 10, 12].get(twice_s as usize).copied()
}

// ───────────────────────── solver ─────────────────────────

struct Params {
    theta: Vec<f64>,
    phi: Vec<f64>,
    w: Vec<f64>,
}

impl Params {
    fn from_flat(flat: &DVector<f64>, n: usize) -> Self {
        Self {
            theta: flat.as_slice()[0..n].to_vec(),
            phi: flat.as_slice()[n..2 * n].to_vec(),
            w: flat.as_slice()[2 * n..3 * n].to_vec(),
        }
    }

    fn to_set(&self, twice_s: u32) -> DirectionSet {
        let entries = (0..self.theta.len())
            .map(|i| {
                let (st, ct) = self.theta[i].sin_cos();
                let (sp, cp) = self.phi[i].sin_cos();
                DirectionWeight {
                    direction: [st * cp, st * sp, ct],
                    c_sq: self.w[i] * self.w[i],
                }
            })
            .collect();
        DirectionSet {
            twice_s,
            entries,
            certificate: None,
        }
    }
}

/// Coherent state and its θ, φ derivatives in the Dicke basis.
fn coherent_with_gradients(
    twice_s: u32,
    theta: f64,
    phi: f64,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let d = twice_s as usize + 1;
    let ts = twice_s as usize;
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let mut chi = Vec::with_capacity(d);
    let mut dtheta = Vec::with_capacity(d);
    let mut dphi = Vec::with_capacity(d);
    for k in 0..d {
        let b = binomial_f64(ts, k).sqrt();
        let phase = Complex64::from_polar(1.0, k as f64 * phi);
        let amp = b * c.powi((ts - k) as i32) * s.powi(k as i32);
        let chi_k = phase * amp;
        // d/dθ of c^{2s−k} s^k, guarding the k = 0 and k = 2s edges
        let mut damp = 0.0;
        if ts > k {
            damp -= 0.5 * (ts - k) as f64 * c.powi((ts - k) as i32 - 1) * s.powi(k as i32 + 1);
        }
        if k > 0 {
            damp += 0.5 * k as f64 * c.powi((ts - k) as i32 + 1) * s.powi(k as i32 - 1);
        }
        chi.push(chi_k);
        dtheta.push(phase * (b * damp));
        dphi.push(chi_k * Complex64::new(0.0, k as f64));
    }
    (chi, dtheta, dphi)
}

/// Hermitian residual M − I flattened to d² real numbers: the diagonal, then
/// re/im of the upper triangle.
fn flatten_hermitian(m: &DMatrix<Complex64>, subtract_identity: bool) -> DVector<f64> {
    let d = m.nrows();
    let mut out = DVector::zeros(d * d);
    let mut idx = 0;
    for i in 0..d {
        out[idx] = m[(i, i)].re - if subtract_identity { 1.0 } else { 0.0 };
        idx += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            out[idx] = m[(i, j)].re;
            out[idx + 1] = m[(i, j)].im;
            idx += 2;
        }
    }
    out
}

fn residual_and_jacobian(
    twice_s: u32,
    params: &Params,
    with_jacobian: bool,
) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let d = twice_s as usize + 1;
    let n = params.theta.len();
    let mut gram = DMatrix::from_element(d, d, Complex64::ZERO);
    let mut states = Vec::with_capacity(n);
    for ((&theta, &phi), &w) in params.theta.iter().zip(&params.phi).zip(&params.w) {
        let (chi, dt, dp) = coherent_with_gradients(twice_s, theta, phi);
        let w2 = w * w;
        for a in 0..d {
            for b in 0..d {
                gram[(a, b)] += chi[a] * chi[b].conj() * w2;
            }
        }
        states.push((chi, dt, dp));
    }
    let residual = flatten_hermitian(&gram, true);
    if !with_jacobian {
        return (residual, None);
    }
    let mut jac = DMatrix::zeros(d * d, 3 * n);
    let mut dm = DMatrix::from_element(d, d, Complex64::ZERO);
    for (i, (chi, dtheta, dphi)) in states.iter().enumerate() {
        let w = params.w[i];
        let w2 = w * w;
        // θ_i column
        rank_two_update(&mut dm, chi, dtheta, w2);
        jac.set_column(i, &flatten_hermitian(&dm, false));
        // φ_i column
        rank_two_update(&mut dm, chi, dphi, w2);
        jac.set_column(n + i, &flatten_hermitian(&dm, false));
        // w_i column: 2w |χ⟩⟨χ|
        for a in 0..d {
            for b in 0..d {
                dm[(a, b)] = chi[a] * chi[b].conj() * (2.0 * w);
            }
        }
        jac.set_column(2 * n + i, &flatten_hermitian(&dm, false));
    }
    (residual, Some(jac))
}

/// dm ← w² (|dχ⟩⟨χ| + |χ⟩⟨dχ|).
fn rank_two_update(
    dm: &mut DMatrix<Complex64>,
    chi: &[Complex64],
    dchi: &[Complex64],
    w2: f64,
) {
    let d = chi.len();
    for a in 0..d {
        for b in 0..d {
            dm[(a, b)] = (dchi[a] * chi[b].conj() + chi[a] * dchi[b].conj()) * w2;
        }
    }
}

/// One Levenberg–Marquardt descent from the given start; returns the final
/// parameters and max-norm residual.
fn lm_descent(twice_s: u32, start: DVector<f64>, max_iters: usize) -> (DVector<f64>, f64) {
    let n = start.len() / 3;
    let mut x = start;
    let mut lambda = 1e-3;
    let (mut res, _) = residual_and_jacobian(twice_s, &Params::from_flat(&x, n), false);
    let mut cost = res.norm_squared();
    for _ in 0..max_iters {
        if res.amax() < 1e-13 {
            break;
        }
        let params = Params::from_flat(&x, n);
        let (r, jac) = residual_and_jacobian(twice_s, &params, true);
        let jac = jac.expect("requested");
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..25 {
            let mut lhs = jtj.clone();
            for k in 0..lhs.nrows() {
                lhs[(k, k)] += lambda * (jtj[(k, k)].abs() + 1e-12);
            }
            let Some(step) = lhs.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let candidate = &x - &step;
            let (cres, _) =
                residual_and_jacobian(twice_s, &Params::from_flat(&candidate, n), false);
            let ccost = cres.norm_squared();
            if ccost < cost {
                x = candidate;
                res = cres;
                cost = ccost;
                lambda = (lambda / 3.0).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    let final_res = res.amax();
    (x, final_res)
}

fn fibonacci_direction(i: usize, n: usize) -> [f64; 3] {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    let r = (1.0 - z * z).sqrt();
    let a = golden * i as f64;
    [r * a.cos(), r * a.sin(), z]
}

fn start_params(twice_s: u32, count: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let rot = random_rotation(rng);
    let mut flat = DVector::zeros(3 * count);
    for i in 0..count {
        let base = fibonacci_direction(i, count);
        let dir = apply_rotation(&rot, base);
        flat[i] = dir[2].clamp(-1.0, 1.0).acos() + 1e-3 * (rng.gen::<f64>() - 0.5);
        flat[count + i] = dir[1].atan2(dir[0]) + 1e-3 * (rng.gen::<f64>() - 0.5);
        flat[2 * count + i] =
            ((twice_s as f64 + 1.0) / count as f64).sqrt() * (1.0 + 0.05 * (rng.gen::<f64>() - 0.5));
    }
    flat
}

/// A uniformly random rotation matrix (axis–angle from the given rng).
pub fn random_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let axis = loop {
        let v = [
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        ];
        let nn = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if nn > 1e-3 && nn <= 1.0 {
            break [v[0] / nn, v[1] / nn, v[2] / nn];
        }
    };
    let angle = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    rotation_about(axis, angle)
}

/// Rodrigues rotation matrix about a unit axis.
pub fn rotation_about(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    let [x, y, z] = axis;
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

pub fn apply_rotation(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Rotation taking `from` to `to` (both unit), about their mutual normal.
fn rotation_between(from: [f64; 3], to: [f64; 3]) -> [[f64; 3]; 3] {
    let cross = [
        from[1] * to[2] - from[2] * to[1],
        from[2] * to[0] - from[0] * to[2],
        from[0] * to[1] - from[1] * to[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = from[0] * to[0] + from[1] * to[1] + from[2] * to[2];
    if sin < 1e-14 {
        if cos > 0.0 {
            return rotation_about([1.0, 0.0, 0.0], 0.0);
        }
        // antipodal: rotate π about any axis orthogonal to `from`
        let helper = if from[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let mut axis = [
            from[1] * helper[2] - from[2] * helper[1],
            from[2] * helper[0] - from[0] * helper[2],
            from[0] * helper[1] - from[1] * helper[0],
        ];
        let nn = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        for a in &mut axis {
            *a /= nn;
        }
        return rotation_about(axis, std::f64::consts::PI);
    }
    let axis = [cross[0] / sin, cross[1] / sin, cross[2] / sin];
    rotation_about(axis, sin.atan2(cos))
}

/// Rotates the set to the canonical frame (first entry to ẑ, first
/// non-collinear entry into the xz-plane with positive x), snaps near-zero
/// components, and sorts entries lexicographically by direction then weight.
pub fn canonicalize(set: &mut DirectionSet) {
    if set.entries.is_empty() {
        return;
    }
    let r1 = rotation_between(set.entries[0].direction, [0.0, 0.0, 1.0]);
    for e in &mut set.entries {
        e.direction = apply_rotation(&r1, e.direction);
    }
    if let Some(anchor) = set
        .entries
        .iter()
        .find(|e| e.direction[0].hypot(e.direction[1]) > 1e-9)
    {
        let phi = anchor.direction[1].atan2(anchor.direction[0]);
        let r2 = rotation_about([0.0, 0.0, 1.0], -phi);
        for e in &mut set.entries {
            e.direction = apply_rotation(&r2, e.direction);
        }
    }
    for e in &mut set.entries {
        for a in &mut e.direction {
            if a.abs() < 1e-13 {
                *a = 0.0;
            }
        }
        let nn = (e.direction[0] * e.direction[0]
            + e.direction[1] * e.direction[1]
            + e.direction[2] * e.direction[2])
            .sqrt();
        for a in &mut e.direction {
            *a /= nn;
        }
    }
    set.entries.sort_by(|a, b| {
        a.direction
            .iter()
            .zip(b.direction.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| a.c_sq.total_cmp(&b.c_sq))
    });
}

/// Solves for a direction set of the given size by deterministic multi-start
/// Levenberg–Marquardt, canonicalizes the best solution, and attaches its
/// residual certificate. Fails (reporting the best residual) when no restart
/// reaches the solver tolerance.
pub fn solve_direction_set(twice_s: u32, count: usize, seed: u64) -> Result<DirectionSet> {
    solve_direction_set_with(twice_s, count, seed, DEFAULT_RESTARTS, 300)
}

/// [`solve_direction_set`] with an explicit restart budget and iteration cap.
pub fn solve_direction_set_with(
    twice_s: u32,
    count: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<DirectionSet> {
    let dim = twice_s as usize + 1;
    if count < dim {
        return Err(Error::InfeasibleCount {
            twice_s,
            count,
            dim,
        });
    }
    let mut best: Option<(f64, DVector<f64>)> = None;
    for restart in 0..restarts {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(restart as u64)));
        let start = start_params(twice_s, count, &mut rng);
        let (x, res) = lm_descent(twice_s, start, max_iters);
        let min_weight = (0..count)
            .map(|i| x[2 * count + i] * x[2 * count + i])
            .fold(f64::INFINITY, f64::min);
        // a vanished weight means the solver found a smaller set; not this count
        let effective = if min_weight < 1e-6 { f64::INFINITY } else { res };
        if best.as_ref().is_none_or(|(b, _)| effective < *b) {
            best = Some((effective, x));
        }
        if effective < 1e-12 {
            break;
        }
    }
    let (residual, x) = best.expect("at least one restart");
    if residual > SOLVER_TOLERANCE {
        return Err(Error::SolverFailure {
            best_residual: residual,
            restarts,
        });
    }
    let mut set = Params::from_flat(&x, count).to_set(twice_s);
    canonicalize(&mut set);
    let report = verify_direction_set(&set);
    set.certificate = Some(DesignCertificate {
        design_residual: report.design_residual,
        weight_sum_error: report.weight_sum_error,
        centroid_error: report.centroid_error,
        seed,
    });
    Ok(set)
}

impl DirectionSet {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let mut set: DirectionSet = serde_json::from_str(json)?;
        for e in &mut set.entries {
            let nn = (e.direction[0] * e.direction[0]
                + e.direction[1] * e.direction[1]
                + e.direction[2] * e.direction[2])
                .sqrt();
            if nn == 0.0 {
                return Err(Error::PriorSchema("zero direction vector".into()));
            }
            for a in &mut e.direction {
                *a /= nn;
            }
        }
        Ok(set)
    }
}
