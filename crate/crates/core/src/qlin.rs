//! Dense complex operator algebra on N-qubit spaces.
//!
//! Provides the Bloch-vector state type, dense operators with Hermitian
//! eigendecomposition, qubit permutations acting as basis-index shuffles,
//! total-spin operators, the two-qubit singlet projector, and Uhlmann
//! fidelity.
//!
//! Conventions: qubit 0 is the most significant basis-index bit, and the
//! singlet is fixed as (|01⟩ − |10⟩)/√2.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the number of copies (dense dimension 2^10 = 1024).
pub const DEFAULT_COPY_CAP: usize = 10;

/// Eigenvalue floor for positive-semidefiniteness checks; accumulated
/// rounding in symmetrized sums can push true zeros slightly negative.
pub const PSD_EIGENVALUE_FLOOR: f64 = -1e-10;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A qubit density matrix parametrized by its Bloch vector, |b| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    b: [f64; 3],
}

impl BlochState {
    /// Builds a state from Bloch components; rejects |b| > 1 (tolerance 1e-12).
    pub fn new(b: [f64; 3]) -> Result<Self> {
        let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidBloch { norm });
        }
        Ok(Self { b })
    }

    /// The maximally mixed state, b = 0.
    pub fn zero() -> Self {
        Self { b: [0.0; 3] }
    }

    /// A pure state pointing along `direction` (normalized here).
    pub fn pure(direction: [f64; 3]) -> Result<Self> {
        let n = (direction[0] * direction[0]
            + direction[1] * direction[1]
            + direction[2] * direction[2])
            .sqrt();
        if n == 0.0 {
            return Err(Error::InvalidBloch { norm: f64::NAN });
        }
        Ok(Self {
            b: [direction[0] / n, direction[1] / n, direction[2] / n],
        })
    }

    /// A state of radius `r` along `direction` (direction normalized here).
    pub fn along(direction: [f64; 3], r: f64) -> Result<Self> {
        let p = Self::pure(direction)?;
        Self::new([p.b[0] * r, p.b[1] * r, p.b[2] * r])
    }

    pub fn components(&self) -> [f64; 3] {
        self.b
    }

    /// Bloch radius |b|.
    pub fn radius(&self) -> f64 {
        (self.b[0] * self.b[0] + self.b[1] * self.b[1] + self.b[2] * self.b[2]).sqrt()
    }

    pub fn dot(&self, other: &BlochState) -> f64 {
        self.b[0] * other.b[0] + self.b[1] * other.b[1] + self.b[2] * other.b[2]
    }
}

/// A dense complex matrix on an N-qubit space (dimension 2^N).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    /// Wraps a square matrix whose dimension must be a power of two.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { dim });
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            matrix: DMatrix::identity(1 << n_qubits, 1 << n_qubits),
        }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            matrix: DMatrix::zeros(1 << n_qubits, 1 << n_qubits),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Tensor product, `self` on the most significant qubits.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Re Tr(self · other); the full trace for Hermitian pairs.
    pub fn trace_product_re(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let mut acc = 0.0;
        let dim = self.dim();
        for i in 0..dim {
            for k in 0..dim {
                let z = self.matrix[(i, k)] * other.matrix[(k, i)];
                acc += z.re;
            }
        }
        acc
    }

    /// Max-norm: largest entrywise modulus.
    pub fn max_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A†‖_max, zero for exactly Hermitian matrices.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() < tol
    }

    /// ‖[A, B]‖_max.
    pub fn commutator_max_norm(&self, other: &Self) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        (ab - ba).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    /// Hermitian eigendecomposition; eigenvalues ascending, columns of the
    /// returned matrix are the matching orthonormal eigenvectors.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        // symmetrize to shed rounding before factorizing
        let m = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let se = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let dim = self.dim();
        let mut vectors = DMatrix::from_element(dim, dim, C_ZERO);
        for (new_col, &old_col) in order.iter().enumerate() {
            vectors.set_column(new_col, &se.eigenvectors.column(old_col));
        }
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Number of eigenvalues above `threshold` in absolute value.
    pub fn numerical_rank(&self, threshold: f64) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|v| v.abs() > threshold)
            .count()
    }

    /// Square root of a positive-semidefinite Hermitian operator.
    ///
    /// Eigenvalues in [PSD floor, 0) are clamped to zero; anything below the
    /// floor is an error.
    pub fn sqrt_psd(&self) -> Result<Self> {
        self.apply_spectral(f64::sqrt)
    }

    /// Inverse square root of a positive-definite Hermitian operator.
    pub fn inv_sqrt_psd(&self) -> Result<Self> {
        self.apply_spectral(|v| 1.0 / v.sqrt())
    }

    fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (values, vectors) = self.eigh();
        if values[0] < PSD_EIGENVALUE_FLOOR {
            return Err(Error::NotPositive {
                min_eigenvalue: values[0],
            });
        }
        let dim = self.dim();
        let mut out = DMatrix::from_element(dim, dim, C_ZERO);
        for (k, &v) in values.iter().enumerate() {
            let fv = f(v.max(0.0));
            if fv == 0.0 {
                continue;
            }
            let col = vectors.column(k);
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += col[i] * col[j].conj() * fv;
                }
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: out,
        })
    }

    /// ⟨ket| self |ket⟩ as a complex number.
    pub fn expectation(&self, ket: &[Complex64]) -> Complex64 {
        debug_assert_eq!(ket.len(), self.dim());
        let mut acc = C_ZERO;
        for i in 0..self.dim() {
            let mut row = C_ZERO;
            for (j, &amp) in ket.iter().enumerate() {
                row += self.matrix[(i, j)] * amp;
            }
            acc += ket[i].conj() * row;
        }
        acc
    }
}

/// A bijection on qubit slots {0..N−1}; the induced operator moves the state
/// of qubit i to slot p(i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitPermutation {
    map: Vec<usize>,
}

impl QubitPermutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &m in &map {
            if m >= n || seen[m] {
                return Err(Error::NotAPermutation { n });
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Swap of qubits i and j, identity elsewhere.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::QubitOutOfRange {
                index: i.max(j),
                n_qubits: n,
            });
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, qubit: usize) -> usize {
        self.map[qubit]
    }

    /// Composition self ∘ other: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            map: (0..self.len()).map(|i| self.map[other.map[i]]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Self { map: inv }
    }

    /// Basis-index map σ with V e_c = e_{σ(c)}: bit i of c moves to bit p(i).
    pub fn basis_index_map(&self) -> Vec<usize> {
        let n = self.len();
        let dim = 1usize << n;
        let mut sigma = vec![0usize; dim];
        for (c, slot) in sigma.iter_mut().enumerate() {
            let mut r = 0usize;
            for i in 0..n {
                let bit = (c >> (n - 1 - i)) & 1;
                r |= bit << (n - 1 - self.map[i]);
            }
            *slot = r;
        }
        sigma
    }
}

/// Pauli matrices σ_x, σ_y, σ_z as 2×2 dense operators.
pub fn pauli() -> [DenseOperator; 3] {
    let sx = DMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]);
    let sy = DMatrix::from_row_slice(
        2,
        2,
        &[
            C_ZERO,
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            C_ZERO,
        ],
    );
    let sz = DMatrix::from_row_slice(
        2,
        2,
        &[C_ONE, C_ZERO, C_ZERO, Complex64::new(-1.0, 0.0)],
    );
    [
        DenseOperator::from_matrix(sx).unwrap(),
        DenseOperator::from_matrix(sy).unwrap(),
        DenseOperator::from_matrix(sz).unwrap(),
    ]
}

/// Single-qubit ket |n̂⟩ pointing along the unit vector `direction`:
/// the +1 eigenstate of n̂·σ⃗.
pub fn ket_along(direction: [f64; 3]) -> [Complex64; 2] {
    let [x, y, z] = direction;
    if z <= -1.0 + 1e-14 {
        return [C_ZERO, C_ONE];
    }
    let a = ((1.0 + z) / 2.0).sqrt();
    let denom = (2.0 * (1.0 + z)).sqrt();
    [
        Complex64::new(a, 0.0),
        Complex64::new(x / denom, y / denom),
    ]
}

/// Tensor product of state vectors, first factor most significant.
pub fn ket_kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &za in a {
        for &zb in b {
            out.push(za * zb);
        }
    }
    out
}

/// Rank-one projector |ket⟩⟨ket|.
pub fn projector(ket: &[Complex64]) -> Result<DenseOperator> {
    let dim = ket.len();
    let mut m = DMatrix::from_element(dim, dim, C_ZERO);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = ket[i] * ket[j].conj();
        }
    }
    DenseOperator::from_matrix(m)
}

/// Applies a qubit permutation to a state vector.
pub fn permute_ket(ket: &[Complex64], p: &QubitPermutation) -> Vec<Complex64> {
    let sigma = p.basis_index_map();
    let mut out = vec![C_ZERO; ket.len()];
    for (c, &amp) in ket.iter().enumerate() {
        out[sigma[c]] = amp;
    }
    out
}

/// Conjugates an operator by a qubit permutation: V A V†.
pub fn permute_operator(op: &DenseOperator, p: &QubitPermutation) -> DenseOperator {
    let sigma = p.basis_index_map();
    let dim = op.dim();
    let mut m = DMatrix::from_element(dim, dim, C_ZERO);
    for i in 0..dim {
        for j in 0..dim {
            m[(sigma[i], sigma[j])] = op.get(i, j);
        }
    }
    DenseOperator::from_matrix(m).expect("dimension preserved")
}

/// ρ(b⃗) = ½(I + b⃗·σ⃗).
pub fn density_from_bloch(state: &BlochState) -> DenseOperator {
    let [x, y, z] = state.components();
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ],
    );
    DenseOperator::from_matrix(m).expect("2x2")
}

/// ρ^⊗n with the default copy cap.
pub fn tensor_power(op: &DenseOperator, n: usize) -> Result<DenseOperator> {
    tensor_power_capped(op, n, DEFAULT_COPY_CAP)
}

/// ρ^⊗n, rejecting results above `cap` qubits.
pub fn tensor_power_capped(op: &DenseOperator, n: usize, cap: usize) -> Result<DenseOperator> {
    assert!(n >= 1, "tensor power needs at least one factor");
    if op.n_qubits() * n > cap {
        return Err(Error::SizeCap {
            requested: op.n_qubits() * n,
            cap,
        });
    }
    let mut out = op.clone();
    for _ in 1..n {
        out = out.kron(op);
    }
    Ok(out)
}

/// The unitary matrix of a qubit permutation on n = p.len() qubits.
pub fn permutation_operator(p: &QubitPermutation) -> DenseOperator {
    let sigma = p.basis_index_map();
    let dim = 1usize << p.len();
    let mut m = DMatrix::from_element(dim, dim, C_ZERO);
    for (c, &r) in sigma.iter().enumerate() {
        m[(r, c)] = C_ONE;
    }
    DenseOperator::from_matrix(m).expect("power of two")
}

/// Embeds a single-qubit operator at the given qubit slot of an n-qubit space.
pub fn embed_single(op: &DenseOperator, qubit: usize, n_qubits: usize) -> DenseOperator {
    debug_assert_eq!(op.n_qubits(), 1);
    debug_assert!(qubit < n_qubits);
    let mut out = DenseOperator::identity(0);
    for q in 0..n_qubits {
        if q == qubit {
            out = out.kron(op);
        } else {
            out = out.kron(&DenseOperator::identity(1));
        }
    }
    out
}

/// Total spin squared S⃗² = (Σ_{q∈subset} S⃗_q)² on n qubits, S⃗_q = σ⃗_q/2.
pub fn total_spin_squared(n_qubits: usize, subset: &[usize]) -> Result<DenseOperator> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    for &q in subset {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits,
            });
        }
    }
    let paulis = pauli();
    let mut total = DenseOperator::zeros(n_qubits);
    for sigma in &paulis {
        let mut component = DenseOperator::zeros(n_qubits);
        for &q in subset {
            component = component.add(&embed_single(sigma, q, n_qubits).scale(0.5));
        }
        total = total.add(&component.matmul(&component));
    }
    Ok(total)
}

/// The two-qubit singlet ket (|01⟩ − |10⟩)/√2.
pub fn singlet_ket() -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        C_ZERO,
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        C_ZERO,
    ]
}

/// Rank-one projector onto the singlet.
pub fn singlet_projector() -> DenseOperator {
    projector(&singlet_ket()).expect("4x4")
}

fn check_density(op: &DenseOperator) -> Result<Vec<f64>> {
    if !op.is_hermitian(1e-12) {
        return Err(Error::NotDensityMatrix {
            reason: format!("hermitian defect {:.3e}", op.hermitian_defect()),
        });
    }
    let tr = op.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-12 {
        return Err(Error::NotDensityMatrix {
            reason: format!("trace {}", tr),
        });
    }
    let values = op.eigenvalues();
    if values[0] < PSD_EIGENVALUE_FLOOR {
        return Err(Error::NotPositive {
            min_eigenvalue: values[0],
        });
    }
    Ok(values)
}

/// Uhlmann fidelity F(ρ, σ) = (Tr √(ρ^{1/2} σ ρ^{1/2}))² between density
/// matrices, computed by spectral decomposition.
pub fn uhlmann_fidelity(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    check_density(rho)?;
    check_density(sigma)?;
    let sqrt_rho = rho.sqrt_psd()?;
    let inner = sqrt_rho.matmul(sigma).matmul(&sqrt_rho);
    let trace_sqrt: f64 = inner
        .eigenvalues()
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .sum();
    Ok(trace_sqrt * trace_sqrt)
}

/// Fidelity between qubit states in Bloch form:
/// ½(1 + b⃗·r⃗ + √(1−b²)√(1−r²)).
pub fn fidelity_bloch(b: &BlochState, r: &BlochState) -> f64 {
    let bb = (1.0 - b.radius().powi(2)).max(0.0);
    let rr = (1.0 - r.radius().powi(2)).max(0.0);
    0.5 * (1.0 + b.dot(r) + bb.sqrt() * rr.sqrt())
}

/// Multiplicity d_N(s) of the total-spin-s sector of N qubits:
/// C(N, N/2+s) · (2s+1)/(N/2+s+1), exact integer arithmetic.
pub fn spin_multiplicity(n_copies: u32, twice_s: u32) -> u64 {
    assert_eq!(
        (n_copies + twice_s) % 2,
        0,
        "2s must have the parity of N"
    );
    assert!(twice_s <= n_copies);
    let k = ((n_copies + twice_s) / 2) as u128;
    let numer = binomial(n_copies as u128, k) * (twice_s as u128 + 1);
    let denom = k + 1;
    assert_eq!(numer % denom, 0, "multiplicity must be integral");
    (numer / denom) as u64
}

/// The list of 2s values appearing for N copies: N mod 2, …, N.
pub fn sector_twice_spins(n_copies: u32) -> Vec<u32> {
    (0..=n_copies)
        .filter(|ts| ts % 2 == n_copies % 2)
        .collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bloch(rng: &mut ChaCha8Rng) -> BlochState {
        let dir = random_direction(rng);
        let r: f64 = rng.gen::<f64>();
        BlochState::new([dir[0] * r, dir[1] * r, dir[2] * r]).unwrap()
    }

    fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-3 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    #[test]
    fn bloch_rejects_long_vectors() {
        assert!(BlochState::new([0.8, 0.8, 0.0]).is_err());
        assert!(BlochState::new([0.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn density_of_zero_bloch_is_maximally_mixed() {
        let rho = density_from_bloch(&BlochState::zero());
        assert_abs_diff_eq!(rho.get(0, 0).re, 0.5);
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.5);
        assert_abs_diff_eq!(rho.get(0, 1).norm(), 0.0);
    }

    #[test]
    fn density_of_pure_up_state() {
        let rho = density_from_bloch(&BlochState::new([0.0, 0.0, 1.0]).unwrap());
        assert_abs_diff_eq!(rho.get(0, 0).re, 1.0);
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.0);
    }

    #[test]
    fn density_eigenvalues_along_x() {
        let rho = density_from_bloch(&BlochState::new([0.6, 0.0, 0.0]).unwrap());
        let evs = rho.eigenvalues();
        assert_abs_diff_eq!(evs[0], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(evs[1], 0.8, epsilon = 1e-12);
        assert!(rho.is_hermitian(1e-14));
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_power_of_identity_over_two() {
        let half = DenseOperator::identity(1).scale(0.5);
        let sq = tensor_power(&half, 2).unwrap();
        assert_eq!(sq.dim(), 4);
        for i in 0..4 {
            assert_abs_diff_eq!(sq.get(i, i).re, 0.25);
        }
    }

    #[test]
    fn tensor_power_of_pure_state_is_rank_one() {
        let rho = density_from_bloch(&BlochState::new([0.0, 0.0, 1.0]).unwrap());
        let cubed = tensor_power(&rho, 3).unwrap();
        assert_eq!(cubed.numerical_rank(1e-10), 1);
        assert_abs_diff_eq!(cubed.get(0, 0).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_power_eigenvalues_multiply() {
        let rho = density_from_bloch(&BlochState::new([0.0, 0.0, 0.5]).unwrap());
        let sq = tensor_power(&rho, 2).unwrap();
        let mut evs = sq.eigenvalues();
        evs.sort_by(f64::total_cmp);
        let expected = [1.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0];
        for (got, want) in evs.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(sq.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_power_respects_cap() {
        let rho = density_from_bloch(&BlochState::zero());
        assert!(matches!(
            tensor_power(&rho, 11),
            Err(Error::SizeCap { .. })
        ));
        assert!(tensor_power_capped(&rho, 11, 11).is_ok());
    }

    #[test]
    fn swap_moves_basis_states() {
        let p = QubitPermutation::transposition(2, 0, 1).unwrap();
        let v = permutation_operator(&p);
        // |01⟩ is index 1, |10⟩ is index 2 (qubit 0 most significant)
        assert_abs_diff_eq!(v.get(2, 1).re, 1.0);
        assert_abs_diff_eq!(v.get(1, 2).re, 1.0);
        let vv = v.matmul(&v);
        assert_abs_diff_eq!(vv.sub(&DenseOperator::identity(2)).max_norm(), 0.0);
    }

    #[test]
    fn identity_permutation_is_identity_matrix() {
        let p = QubitPermutation::identity(3);
        let v = permutation_operator(&p);
        assert_abs_diff_eq!(v.sub(&DenseOperator::identity(3)).max_norm(), 0.0);
    }

    #[test]
    fn swap_first_and_last_on_singlet_times_up() {
        // |σ⟩⊗|ẑ⟩ = (|010⟩ − |100⟩)/√2; exchanging qubits 0 and 2 sends it to
        // (|010⟩ − |001⟩)/√2, so the overlap with the original is 1/2.
        let psi = ket_kron(&singlet_ket(), &ket_along([0.0, 0.0, 1.0]));
        let v_ac = QubitPermutation::transposition(3, 0, 2).unwrap();
        let moved = permute_ket(&psi, &v_ac);
        let overlap: Complex64 = psi
            .iter()
            .zip(&moved)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert_abs_diff_eq!(overlap.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(overlap.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exchange_identity_on_mixed_symmetry_states() {
        // (V_AC − V_BC)² acts as 3 on |σ⟩⊗|n̂⟩.
        let psi = ket_kron(&singlet_ket(), &ket_along([0.0, 0.0, 1.0]));
        let v_ac = permutation_operator(&QubitPermutation::transposition(3, 0, 2).unwrap());
        let v_bc = permutation_operator(&QubitPermutation::transposition(3, 1, 2).unwrap());
        let diff = v_ac.sub(&v_bc);
        let squared = diff.matmul(&diff);
        let got = squared.expectation(&psi);
        assert_abs_diff_eq!(got.re, 3.0, epsilon = 1e-12);
        // and the same state is an eigenvector, not merely of matching norm
        let applied = {
            let m = squared.matrix();
            (0..8)
                .map(|i| (0..8).map(|j| m[(i, j)] * psi[j]).sum::<Complex64>())
                .collect::<Vec<_>>()
        };
        for (lhs, rhs) in applied.iter().zip(&psi) {
            assert_abs_diff_eq!((lhs - rhs * 3.0).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn permutation_operator_is_group_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(2..=6);
            let p = random_permutation(&mut rng, n);
            let q = random_permutation(&mut rng, n);
            let vp = permutation_operator(&p);
            let vq = permutation_operator(&q);
            let vpq = permutation_operator(&p.compose(&q));
            assert!(vp.matmul(&vq).sub(&vpq).max_norm() < 1e-15);
        }
    }

    fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> QubitPermutation {
        let mut map: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            map.swap(i, j);
        }
        QubitPermutation::new(map).unwrap()
    }

    #[test]
    fn spin_squared_single_qubit() {
        let s2 = total_spin_squared(1, &[0]).unwrap();
        assert_abs_diff_eq!(
            s2.sub(&DenseOperator::identity(1).scale(0.75)).max_norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn spin_squared_two_qubits_singlet_triplet() {
        let s2 = total_spin_squared(2, &[0, 1]).unwrap();
        let evs = s2.eigenvalues();
        assert_abs_diff_eq!(evs[0], 0.0, epsilon = 1e-12);
        for &v in &evs[1..] {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spin_squared_four_qubits_multiplicities() {
        let s2 = total_spin_squared(4, &[0, 1, 2, 3]).unwrap();
        let evs = s2.eigenvalues();
        let count = |target: f64| evs.iter().filter(|v| (**v - target).abs() < 1e-9).count();
        assert_eq!(count(6.0), 5);
        assert_eq!(count(2.0), 9);
        assert_eq!(count(0.0), 2);
    }

    #[test]
    fn spin_eigenvalue_multiplicity_matches_closed_form() {
        for n in 1..=6u32 {
            let s2 = total_spin_squared(n as usize, &(0..n as usize).collect::<Vec<_>>()).unwrap();
            let evs = s2.eigenvalues();
            for ts in sector_twice_spins(n) {
                let s = ts as f64 / 2.0;
                let target = s * (s + 1.0);
                let found = evs.iter().filter(|v| (**v - target).abs() < 1e-8).count();
                let expected = (ts as u64 + 1) * spin_multiplicity(n, ts);
                assert_eq!(found as u64, expected, "N={n} 2s={ts}");
            }
        }
    }

    #[test]
    fn permutations_and_spins_commute_with_tensor_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=5usize {
            let rho = density_from_bloch(&random_bloch(&mut rng));
            let rho_n = tensor_power(&rho, n).unwrap();
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = permutation_operator(
                        &QubitPermutation::transposition(n, i, j).unwrap(),
                    );
                    assert!(v.commutator_max_norm(&rho_n) < 1e-12, "V_{i}{j} N={n}");
                }
            }
            let full: Vec<usize> = (0..n).collect();
            let s2 = total_spin_squared(n, &full).unwrap();
            assert!(s2.commutator_max_norm(&rho_n) < 1e-12);
            let partial: Vec<usize> = (0..n - 1).collect();
            let s2_partial = total_spin_squared(n, &partial).unwrap();
            assert!(s2_partial.commutator_max_norm(&rho_n) < 1e-12);
        }
    }

    #[test]
    fn singlet_projector_basics() {
        let p = singlet_projector();
        assert_abs_diff_eq!(p.trace().re, 1.0, epsilon = 1e-15);
        assert_eq!(p.numerical_rank(1e-12), 1);
        let swap = permutation_operator(&QubitPermutation::transposition(2, 0, 1).unwrap());
        // V|σ⟩ = −|σ⟩, so conjugation leaves the projector fixed
        let conj = swap.matmul(&p).matmul(&swap);
        assert!(conj.sub(&p).max_norm() < 1e-15);
        let applied = swap.matrix() * DMatrix::from_column_slice(4, 1, &singlet_ket());
        for (got, want) in applied.iter().zip(singlet_ket()) {
            assert_abs_diff_eq!((got + want).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn singlet_overlap_with_product_of_mixed_states() {
        let b = BlochState::new([0.0, 0.0, 0.5]).unwrap();
        let rho2 = tensor_power(&density_from_bloch(&b), 2).unwrap();
        let p = singlet_projector();
        assert_abs_diff_eq!(p.trace_product_re(&rho2), 0.1875, epsilon = 1e-13);

        let pure = BlochState::new([0.0, 1.0, 0.0]).unwrap();
        let rho2 = tensor_power(&density_from_bloch(&pure), 2).unwrap();
        assert_abs_diff_eq!(p.trace_product_re(&rho2), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn uhlmann_fidelity_reference_points() {
        let up = density_from_bloch(&BlochState::new([0.0, 0.0, 1.0]).unwrap());
        let x = density_from_bloch(&BlochState::new([1.0, 0.0, 0.0]).unwrap());
        let mixed = density_from_bloch(&BlochState::zero());
        assert_abs_diff_eq!(uhlmann_fidelity(&up, &up).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uhlmann_fidelity(&mixed, &up).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(uhlmann_fidelity(&up, &x).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn uhlmann_fidelity_matches_bloch_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = random_bloch(&mut rng);
            let b = random_bloch(&mut rng);
            let lhs = uhlmann_fidelity(&density_from_bloch(&a), &density_from_bloch(&b)).unwrap();
            let rhs = uhlmann_fidelity(&density_from_bloch(&b), &density_from_bloch(&a)).unwrap();
            let closed = fidelity_bloch(&a, &b);
            assert_abs_diff_eq!(lhs, closed, epsilon = 1e-10);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn uhlmann_rejects_non_density_input() {
        let not_normalized = DenseOperator::identity(1);
        let ok = density_from_bloch(&BlochState::zero());
        assert!(uhlmann_fidelity(&not_normalized, &ok).is_err());
    }

    #[test]
    fn multiplicity_dimension_sum() {
        for n in 1..=10u32 {
            let total: u64 = sector_twice_spins(n)
                .iter()
                .map(|&ts| (ts as u64 + 1) * spin_multiplicity(n, ts))
                .sum();
            assert_eq!(total, 1u64 << n, "N = {n}");
        }
    }
}
