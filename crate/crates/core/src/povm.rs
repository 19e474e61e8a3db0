//! The minimal optimal POVM for N copies.
//!
//! The N-copy space splits into total-spin sectors s = s₀ … N/2 with
//! multiplicity d_N(s). Each sector contributes one positive operator per
//! measurement direction,
//!
//!   O_{N,s,i} = c²_{s,i} d_N(s) · Sym(|σ⟩⟨σ|^⊗(N/2−s) ⊗ |n̂_i⟩⟨n̂_i|^⊗2s),
//!
//! where Sym averages over qubit permutations. The average runs over the
//! distinct arrangements of singlet pairs and direction slots instead of all
//! N! permutations; the stabilizer of the base layout (pair order, in-pair
//! order, direction-slot order) contributes only multiplicity.
//!
//! The measurement structure is independent of the prior; only the guess
//! magnitudes r_{N,s} = g₂/√(g₁²+g₂²) depend on it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::design::{self, DirectionSet};
use crate::error::{Error, Result};
use crate::prior::{self, RadialPrior};
use crate::qlin::{
    self, BlochState, DenseOperator, QubitPermutation, DEFAULT_COPY_CAP,
};
use crate::quad;

/// Identity-resolution tolerance for a built POVM.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Eigenvalue threshold for numerical operator ranks.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// One total-spin sector of the N-copy space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinSector {
    pub n_copies: u32,
    pub twice_s: u32,
    /// d_N(s), the number of equivalent copies of the sector.
    pub multiplicity: u64,
    /// Outcomes the sector contributes to the minimal measurement
    /// (n_ps(2s), with n_ps(0) = 1); `None` where only conjectured.
    pub n_outcomes: Option<usize>,
}

/// The spin sectors of N copies, lowest spin first.
pub fn sectors(n_copies: u32) -> Result<Vec<SpinSector>> {
    if n_copies == 0 || n_copies as usize > DEFAULT_COPY_CAP {
        return Err(Error::SizeCap {
            requested: n_copies as usize,
            cap: DEFAULT_COPY_CAP,
        });
    }
    Ok(qlin::sector_twice_spins(n_copies)
        .into_iter()
        .map(|twice_s| SpinSector {
            n_copies,
            twice_s,
            multiplicity: qlin::spin_multiplicity(n_copies, twice_s),
            n_outcomes: design::pure_state_count(twice_s),
        })
        .collect())
}

/// Minimal outcome count n_min(N) = Σ_s n_ps(2s); None once any sector
/// count is conjectural (2s ≥ 6).
pub fn minimal_outcomes(n_copies: u32) -> Option<usize> {
    sectors(n_copies)
        .ok()?
        .iter()
        .map(|s| s.n_outcomes)
        .sum()
}

/// One POVM outcome: the positive operator, its sector, direction, weight,
/// and the guess magnitude along the direction.
#[derive(Debug, Clone)]
pub struct PovmElement {
    pub sector: SpinSector,
    pub index: usize,
    pub direction: [f64; 3],
    /// The design weight c²_{s,i}.
    pub weight: f64,
    /// Guess Bloch radius r_{N,s} ∈ [0, 1].
    pub guess_r: f64,
    pub operator: DenseOperator,
}

impl PovmElement {
    /// The proposed state after this outcome: ½(I + r n̂·σ⃗).
    pub fn guess(&self) -> BlochState {
        BlochState::new([
            self.guess_r * self.direction[0],
            self.guess_r * self.direction[1],
            self.guess_r * self.direction[2],
        ])
        .expect("|r·n̂| ≤ 1")
    }
}

/// The full minimal POVM for N copies.
#[derive(Debug, Clone)]
pub struct Povm {
    n_copies: u32,
    prior_id: String,
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn n_copies(&self) -> u32 {
        self.n_copies
    }

    pub fn prior_id(&self) -> &str {
        &self.prior_id
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    /// ‖Σ O − I‖_max over the 2^N-dimensional space.
    pub fn identity_residual(&self) -> f64 {
        let mut sum = DenseOperator::zeros(self.n_copies as usize);
        for e in &self.elements {
            sum = sum.add(&e.operator);
        }
        sum.sub(&DenseOperator::identity(self.n_copies as usize))
            .max_norm()
    }
}

/// Singlet-pair slots plus the leftover direction slots of one layout.
type PairLayout = (Vec<(usize, usize)>, Vec<usize>);

/// Enumerates the distinct layouts of `k` disjoint singlet pairs among the
/// qubits, the leftovers (sorted) being direction slots.
fn arrangements(n_qubits: usize, pairs: usize) -> Vec<PairLayout> {
    fn recurse(
        free: &[usize],
        pairs_left: usize,
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<PairLayout>,
    ) {
        if pairs_left == 0 {
            out.push((chosen.clone(), free.to_vec()));
            return;
        }
        if free.len() < 2 * pairs_left {
            return;
        }
        let a = free[0];
        let rest: Vec<usize> = free[1..].to_vec();
        // a is a direction slot
        if free.len() > 2 * pairs_left {
            let mut sub = recurse_collect(&rest, pairs_left, chosen);
            for (p, mut dirs) in sub.drain(..) {
                let mut d = vec![a];
                d.append(&mut dirs);
                d.sort_unstable();
                out.push((p, d));
            }
        }
        // a pairs with each later qubit
        for (idx, &b) in rest.iter().enumerate() {
            let mut remaining = rest.clone();
            remaining.remove(idx);
            chosen.push((a, b));
            recurse(&remaining, pairs_left - 1, chosen, out);
            chosen.pop();
        }
    }
    fn recurse_collect(
        free: &[usize],
        pairs_left: usize,
        chosen: &mut Vec<(usize, usize)>,
    ) -> Vec<PairLayout> {
        let mut out = Vec::new();
        recurse(free, pairs_left, chosen, &mut out);
        out
    }
    let free: Vec<usize> = (0..n_qubits).collect();
    let mut out = Vec::new();
    recurse(&free, pairs, &mut Vec::new(), &mut out);
    out
}

/// The operator part of one POVM element:
/// c² d_N(s) · Sym(σ-pairs ⊗ direction projectors).
pub fn build_element(
    n_copies: u32,
    twice_s: u32,
    direction: [f64; 3],
    c_sq: f64,
) -> Result<DenseOperator> {
    if twice_s % 2 != n_copies % 2 || twice_s > n_copies {
        return Err(Error::ParityMismatch { n_copies, twice_s });
    }
    if n_copies as usize > DEFAULT_COPY_CAP {
        return Err(Error::SizeCap {
            requested: n_copies as usize,
            cap: DEFAULT_COPY_CAP,
        });
    }
    let n = n_copies as usize;
    let pairs = (n_copies - twice_s) as usize / 2;
    let dim = 1usize << n;

    // base ket: singlet pairs on (0,1), (2,3), …, direction qubits at the end
    let mut base: Vec<Complex64> = vec![Complex64::ONE];
    let singlet = qlin::singlet_ket();
    for _ in 0..pairs {
        base = qlin::ket_kron(&base, &singlet);
    }
    let dir_ket = qlin::ket_along(direction);
    for _ in 0..twice_s {
        base = qlin::ket_kron(&base, &dir_ket);
    }

    let layouts = arrangements(n, pairs);
    let mut sum = DMatrix::from_element(dim, dim, Complex64::ZERO);
    for (pair_slots, dir_slots) in &layouts {
        let mut map = vec![0usize; n];
        for (j, &(a, b)) in pair_slots.iter().enumerate() {
            map[2 * j] = a;
            map[2 * j + 1] = b;
        }
        for (m, &q) in dir_slots.iter().enumerate() {
            map[2 * pairs + m] = q;
        }
        let perm = QubitPermutation::new(map).expect("bijection by construction");
        let psi = qlin::permute_ket(&base, &perm);
        let support: Vec<(usize, Complex64)> = psi
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(i, &z)| (i, z))
            .collect();
        for &(i, zi) in &support {
            for &(j, zj) in &support {
                sum[(i, j)] += zi * zj.conj();
            }
        }
    }
    let scale = c_sq * qlin::spin_multiplicity(n_copies, twice_s) as f64 / layouts.len() as f64;
    let op = DenseOperator::from_matrix(sum.map(|z| z * scale))?;
    Ok(op)
}

/// Guess magnitude r_{N,s} = g₂/√(g₁²+g₂²); zero when both integrals vanish
/// (the degenerate pure-prior sub-maximal sectors, where the guess radius is
/// undetermined and continuity with non-pure priors picks 0).
pub fn guess_magnitude(
    prior: &RadialPrior,
    n_copies: u32,
    twice_s: u32,
    order: usize,
) -> Result<f64> {
    let (g1, g2) = prior::g_integrals(prior, n_copies, twice_s, order)?;
    let norm = g1.hypot(g2);
    if norm < 1e-300 {
        return Ok(0.0);
    }
    Ok(g2 / norm)
}

/// Builds the minimal POVM for N copies with the default direction sets and
/// quadrature order.
pub fn build_povm(n_copies: u32, prior: &RadialPrior) -> Result<Povm> {
    build_povm_with_order(n_copies, prior, quad::DEFAULT_ORDER)
}

/// [`build_povm`] at an explicit quadrature order for the guess integrals.
pub fn build_povm_with_order(n_copies: u32, prior: &RadialPrior, order: usize) -> Result<Povm> {
    let mut sets = BTreeMap::new();
    for sector in sectors(n_copies)? {
        if sector.twice_s >= 1 {
            sets.insert(sector.twice_s, design::direction_set_for(sector.twice_s)?);
        }
    }
    build_povm_with_direction_sets(n_copies, prior, &sets, order)
}

/// Core builder: one operator per direction per sector, guesses from the
/// prior, identity resolution checked at [`IDENTITY_TOLERANCE`].
pub fn build_povm_with_direction_sets(
    n_copies: u32,
    prior: &RadialPrior,
    sets: &BTreeMap<u32, DirectionSet>,
    order: usize,
) -> Result<Povm> {
    let mut elements = Vec::new();
    for sector in sectors(n_copies)? {
        let r = guess_magnitude(prior, n_copies, sector.twice_s, order)?;
        if sector.twice_s == 0 {
            let operator = build_element(n_copies, 0, [0.0, 0.0, 1.0], 1.0)?;
            elements.push(PovmElement {
                sector,
                index: 0,
                direction: [0.0, 0.0, 1.0],
                weight: 1.0,
                guess_r: r,
                operator,
            });
            continue;
        }
        let set = sets
            .get(&sector.twice_s)
            .ok_or(Error::MissingDirectionSet {
                twice_s: sector.twice_s,
            })?;
        for (index, entry) in set.entries.iter().enumerate() {
            let operator =
                build_element(n_copies, sector.twice_s, entry.direction, entry.c_sq)?;
            elements.push(PovmElement {
                sector,
                index,
                direction: entry.direction,
                weight: entry.c_sq,
                guess_r: r,
                operator,
            });
        }
    }
    let povm = Povm {
        n_copies,
        prior_id: prior.id().to_string(),
        elements,
    };
    let residual = povm.identity_residual();
    if residual > IDENTITY_TOLERANCE {
        return Err(Error::IdentityResolution { residual });
    }
    Ok(povm)
}

/// Closed-form outcome probability
/// Tr(O ρ^⊗N) = c² d_N(s) ((1−b²)/4)^{N/2−s} ((1+b⃗·n̂)/2)^{2s}.
pub fn outcome_probability(element: &PovmElement, state: &BlochState) -> f64 {
    let sector = element.sector;
    let b = state.components();
    let dot = b[0] * element.direction[0]
        + b[1] * element.direction[1]
        + b[2] * element.direction[2];
    let pairs = ((sector.n_copies - sector.twice_s) / 2) as i32;
    let x = ((1.0 - state.radius().powi(2)) / 4.0).max(0.0);
    element.weight
        * sector.multiplicity as f64
        * x.powi(pairs)
        * ((1.0 + dot) / 2.0).powi(sector.twice_s as i32)
}

/// Direct matrix-trace probability Tr(O ρ^⊗N); the oracle for
/// [`outcome_probability`].
pub fn outcome_probability_trace(element: &PovmElement, state: &BlochState) -> Result<f64> {
    let rho = qlin::density_from_bloch(state);
    let rho_n = qlin::tensor_power(&rho, element.sector.n_copies as usize)?;
    Ok(element.operator.trace_product_re(&rho_n))
}

// ───────────────────────── serialization ─────────────────────────

/// On-disk POVM element: sector labels, geometry, guess, optional matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmElementDocument {
    pub twice_s: u32,
    pub index: usize,
    pub direction: [f64; 3],
    pub weight: f64,
    pub guess_r: f64,
    /// Row-major [re, im] entries, present with `--with-matrices`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

/// On-disk POVM document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmDocument {
    pub n_copies: u32,
    pub prior_id: String,
    pub elements: Vec<PovmElementDocument>,
}

impl Povm {
    pub fn to_document(&self, with_matrices: bool) -> PovmDocument {
        PovmDocument {
            n_copies: self.n_copies,
            prior_id: self.prior_id.clone(),
            elements: self
                .elements
                .iter()
                .map(|e| PovmElementDocument {
                    twice_s: e.sector.twice_s,
                    index: e.index,
                    direction: e.direction,
                    weight: e.weight,
                    guess_r: e.guess_r,
                    matrix: with_matrices.then(|| {
                        let dim = e.operator.dim();
                        let mut rows = Vec::with_capacity(dim * dim);
                        for i in 0..dim {
                            for j in 0..dim {
                                let z = e.operator.get(i, j);
                                rows.push([z.re, z.im]);
                            }
                        }
                        rows
                    }),
                })
                .collect(),
        }
    }

    /// Rebuilds a POVM from its document; elements without a stored matrix
    /// are reconstructed from their sector, direction, and weight.
    pub fn from_document(doc: &PovmDocument) -> Result<Self> {
        let mut elements = Vec::with_capacity(doc.elements.len());
        let secs = sectors(doc.n_copies)?;
        for e in &doc.elements {
            let sector = *secs
                .iter()
                .find(|s| s.twice_s == e.twice_s)
                .ok_or(Error::ParityMismatch {
                    n_copies: doc.n_copies,
                    twice_s: e.twice_s,
                })?;
            let operator = match &e.matrix {
                Some(rows) => {
                    let dim = 1usize << doc.n_copies;
                    if rows.len() != dim * dim {
                        return Err(Error::PriorSchema(format!(
                            "matrix has {} entries, expected {}",
                            rows.len(),
                            dim * dim
                        )));
                    }
                    let m = DMatrix::from_fn(dim, dim, |i, j| {
                        let [re, im] = rows[i * dim + j];
                        Complex64::new(re, im)
                    });
                    DenseOperator::from_matrix(m)?
                }
                None => build_element(doc.n_copies, e.twice_s, e.direction, e.weight)?,
            };
            elements.push(PovmElement {
                sector,
                index: e.index,
                direction: e.direction,
                weight: e.weight,
                guess_r: e.guess_r,
                operator,
            });
        }
        Ok(Povm {
            n_copies: doc.n_copies,
            prior_id: doc.prior_id.clone(),
            elements,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ORDER: usize = 64;

    #[test]
    fn sector_tables() {
        let two = sectors(2).unwrap();
        assert_eq!(
            two.iter().map(|s| (s.twice_s, s.multiplicity)).collect::<Vec<_>>(),
            vec![(0, 1), (2, 1)]
        );
        let four = sectors(4).unwrap();
        assert_eq!(
            four.iter().map(|s| (s.twice_s, s.multiplicity)).collect::<Vec<_>>(),
            vec![(0, 2), (2, 3), (4, 1)]
        );
        let five = sectors(5).unwrap();
        let total: u64 = five
            .iter()
            .map(|s| (s.twice_s as u64 + 1) * s.multiplicity)
            .sum();
        assert_eq!(total, 32);
        assert!(sectors(0).is_err());
        assert!(sectors(11).is_err());
    }

    #[test]
    fn minimal_outcome_counts() {
        let expected = [2usize, 5, 8, 15, 20];
        for (i, &want) in expected.iter().enumerate() {
            assert_eq!(minimal_outcomes(i as u32 + 1), Some(want));
        }
        assert_eq!(minimal_outcomes(6), None);
    }

    #[test]
    fn arrangement_counts_match_multinomials() {
        // N!/(2^k k! (2s)!) distinct layouts
        assert_eq!(arrangements(2, 1).len(), 1);
        assert_eq!(arrangements(3, 1).len(), 3);
        assert_eq!(arrangements(4, 2).len(), 3);
        assert_eq!(arrangements(4, 1).len(), 6);
        assert_eq!(arrangements(5, 2).len(), 15);
        assert_eq!(arrangements(6, 3).len(), 15);
    }

    #[test]
    fn top_sector_element_is_a_weighted_product_projector() {
        let n = [0.6, 0.0, 0.8];
        let op = build_element(3, 3, n, 2.0 / 3.0).unwrap();
        let mut ket = vec![Complex64::ONE];
        for _ in 0..3 {
            ket = qlin::ket_kron(&ket, &qlin::ket_along(n));
        }
        let expected = qlin::projector(&ket).unwrap().scale(2.0 / 3.0);
        assert!(op.sub(&expected).max_norm() < 1e-14);

        // four copies: the 2s = 4 elements are weighted product projectors too
        let set = crate::design::direction_set_for(4).unwrap();
        let entry = set.entries[3];
        let op = build_element(4, 4, entry.direction, entry.c_sq).unwrap();
        let mut ket = vec![Complex64::ONE];
        for _ in 0..4 {
            ket = qlin::ket_kron(&ket, &qlin::ket_along(entry.direction));
        }
        let expected = qlin::projector(&ket).unwrap().scale(entry.c_sq);
        assert!(op.sub(&expected).max_norm() < 1e-13);
    }

    #[test]
    fn aligned_pure_state_probability_on_the_top_sector() {
        // |ẑ⟩^⊗3 meets the ẑ-direction rank-one element with probability 2/3
        let op = build_element(3, 3, [0.0, 0.0, 1.0], 2.0 / 3.0).unwrap();
        let up = BlochState::new([0.0, 0.0, 1.0]).unwrap();
        let rho3 = qlin::tensor_power(&qlin::density_from_bloch(&up), 3).unwrap();
        assert_abs_diff_eq!(op.trace_product_re(&rho3), 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn coset_reduction_matches_full_group_average() {
        // N = 4: compare against (1/4!) Σ_{V∈S4} V X V† built the long way
        for (twice_s, c_sq) in [(0u32, 1.0f64), (2, 0.75)] {
            let dir = [0.0, 0.6, 0.8];
            let got = build_element(4, twice_s, dir, c_sq).unwrap();

            let pairs = (4 - twice_s as usize) / 2;
            let mut base = vec![Complex64::ONE];
            for _ in 0..pairs {
                base = qlin::ket_kron(&base, &qlin::singlet_ket());
            }
            for _ in 0..twice_s {
                base = qlin::ket_kron(&base, &qlin::ket_along(dir));
            }
            let x = qlin::projector(&base).unwrap();
            let mut sum = DenseOperator::zeros(4);
            let mut count = 0.0;
            let mut items: Vec<usize> = (0..4).collect();
            permute_all(&mut items, 4, &mut |perm| {
                let p = QubitPermutation::new(perm.to_vec()).unwrap();
                sum = sum.add(&qlin::permute_operator(&x, &p));
                count += 1.0;
            });
            let scale = c_sq * qlin::spin_multiplicity(4, twice_s) as f64 / count;
            let expected = sum.scale(scale);
            assert!(
                got.sub(&expected).max_norm() < 1e-13,
                "2s = {twice_s}"
            );
        }
    }

    fn permute_all(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == 1 {
            visit(items);
            return;
        }
        for i in 0..k {
            permute_all(items, k - 1, visit);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }

    #[test]
    fn two_copy_elements_have_the_textbook_forms() {
        let povm = build_povm_with_order(2, &RadialPrior::pure(), ORDER).unwrap();
        assert_eq!(povm.elements().len(), 5);
        let singlet = &povm.elements()[0];
        assert_eq!(singlet.sector.twice_s, 0);
        assert!(singlet
            .operator
            .sub(&qlin::singlet_projector())
            .max_norm()
            < 1e-14);
        assert_abs_diff_eq!(singlet.guess_r, 0.0);
        for e in &povm.elements()[1..] {
            let mut ket = qlin::ket_along(e.direction).to_vec();
            ket = qlin::ket_kron(&ket, &qlin::ket_along(e.direction));
            let expected = qlin::projector(&ket).unwrap().scale(0.75);
            assert!(e.operator.sub(&expected).max_norm() < 1e-13);
        }
    }

    #[test]
    fn three_copy_mixed_sector_matches_exchange_construction() {
        // |σ⟩⟨σ|⊗|±n̂⟩⟨±n̂| + (1/3)(V_AC−V_BC)(…)(V_AC−V_BC)
        let n = [0.0, 0.0, 1.0];
        for sign in [1.0, -1.0] {
            let dir = [n[0] * sign, n[1] * sign, n[2] * sign];
            let got = build_element(3, 1, dir, 1.0).unwrap();

            let base = qlin::ket_kron(&qlin::singlet_ket(), &qlin::ket_along(dir));
            let x = qlin::projector(&base).unwrap();
            let v_ac = qlin::permutation_operator(
                &QubitPermutation::transposition(3, 0, 2).unwrap(),
            );
            let v_bc = qlin::permutation_operator(
                &QubitPermutation::transposition(3, 1, 2).unwrap(),
            );
            let diff = v_ac.sub(&v_bc);
            let expected = x.add(&diff.matmul(&x).matmul(&diff).scale(1.0 / 3.0));
            assert!(got.sub(&expected).max_norm() < 1e-13, "sign {sign}");
        }
    }

    #[test]
    fn identity_resolution_up_to_five_copies() {
        for n in 1..=5u32 {
            let povm = build_povm_with_order(n, &RadialPrior::uniform_ball(), ORDER).unwrap();
            let residual = povm.identity_residual();
            assert!(residual < IDENTITY_TOLERANCE, "N={n}: {residual:.3e}");
            assert_eq!(povm.elements().len(), minimal_outcomes(n).unwrap());
        }
    }

    #[test]
    fn four_copy_ranks_per_sector() {
        let povm = build_povm_with_order(4, &RadialPrior::uniform_ball(), ORDER).unwrap();
        let mut ranks: Vec<(u32, usize)> = povm
            .elements()
            .iter()
            .map(|e| (e.sector.twice_s, e.operator.numerical_rank(RANK_THRESHOLD)))
            .collect();
        ranks.sort_unstable();
        let rank2 = ranks.iter().filter(|r| **r == (0, 2)).count();
        let rank3 = ranks.iter().filter(|r| **r == (2, 3)).count();
        let rank1 = ranks.iter().filter(|r| **r == (4, 1)).count();
        assert_eq!((rank2, rank3, rank1), (1, 4, 10));
    }

    #[test]
    fn element_traces_equal_weight_times_multiplicity() {
        let povm = build_povm_with_order(3, &RadialPrior::pure(), ORDER).unwrap();
        for e in povm.elements() {
            assert_abs_diff_eq!(
                e.operator.trace().re,
                e.weight * e.sector.multiplicity as f64,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn closed_form_probability_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let povms: Vec<Povm> = (1..=5u32)
            .map(|n| build_povm_with_order(n, &RadialPrior::uniform_ball(), ORDER).unwrap())
            .collect();
        for _ in 0..100 {
            let povm = &povms[rng.gen_range(0..povms.len())];
            let e = &povm.elements()[rng.gen_range(0..povm.elements().len())];
            let b = random_bloch(&mut rng);
            let closed = outcome_probability(e, &b);
            let traced = outcome_probability_trace(e, &b).unwrap();
            assert_abs_diff_eq!(closed, traced, epsilon = 1e-10);
        }
    }

    fn random_bloch(rng: &mut ChaCha8Rng) -> BlochState {
        loop {
            let v = [
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            ];
            if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                return BlochState::new(v).unwrap();
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let b = BlochState::new([0.3, 0.0, 0.0]).unwrap();
        for n in 1..=4u32 {
            let povm = build_povm_with_order(n, &RadialPrior::pure(), ORDER).unwrap();
            let total: f64 = povm
                .elements()
                .iter()
                .map(|e| outcome_probability(e, &b))
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_states_never_trigger_sub_maximal_sectors() {
        let b = BlochState::new([0.0, 1.0, 0.0]).unwrap();
        for n in 2..=5u32 {
            let povm = build_povm_with_order(n, &RadialPrior::pure(), ORDER).unwrap();
            let low: f64 = povm
                .elements()
                .iter()
                .filter(|e| e.sector.twice_s < n)
                .map(|e| outcome_probability_trace(e, &b).unwrap())
                .sum();
            assert_abs_diff_eq!(low, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn guess_magnitudes_at_reference_priors() {
        for n in 1..=5u32 {
            assert_abs_diff_eq!(
                guess_magnitude(&RadialPrior::pure(), n, n, ORDER).unwrap(),
                1.0,
                epsilon = 1e-14
            );
            for ts in qlin::sector_twice_spins(n) {
                assert_abs_diff_eq!(
                    guess_magnitude(&RadialPrior::random_state(), n, ts, ORDER).unwrap(),
                    0.0,
                    epsilon = 1e-13
                );
            }
        }
        // pure prior, sub-maximal sector: undetermined, fixed to 0
        assert_abs_diff_eq!(
            guess_magnitude(&RadialPrior::pure(), 2, 0, ORDER).unwrap(),
            0.0
        );
    }

    #[test]
    fn document_round_trip_with_and_without_matrices() {
        let povm = build_povm_with_order(3, &prior::reference_two_point(), ORDER).unwrap();
        for with_matrices in [false, true] {
            let doc = povm.to_document(with_matrices);
            let json = serde_json::to_string(&doc).unwrap();
            let back = Povm::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back.elements().len(), povm.elements().len());
            for (a, b) in povm.elements().iter().zip(back.elements()) {
                assert_eq!(a.direction, b.direction);
                assert_eq!(a.guess_r, b.guess_r);
                assert!(a.operator.sub(&b.operator).max_norm() < 1e-15);
            }
        }
    }
}
