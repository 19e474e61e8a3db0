//! The universal (state-independent, isotropic) 1→2 qubit cloner and its
//! equivalence with single-copy optimal measurement.
//!
//! The cloner maps ρ(b⃗) to
//!
//!   ρ_c = ¼ (I⊗I + η (b⃗·σ⃗⊗I + I⊗b⃗·σ⃗) + t Σ_j σ_j⊗σ_j),
//!
//! with shrinking factor η and correlation coefficient t. Physicality of
//! ρ_c for every input pins |η| ≤ 2/3; the optimal cloner sits on that
//! boundary at (η, t) = (2/3, 1/3). Feeding the optimal clone into the
//! two-copy measurement structure and re-optimizing the guesses reproduces
//! the single-copy maximal mean fidelity exactly: optimal cloning can be the
//! front end of an optimal measurement.

use crate::error::{Error, Result};
use crate::fidelity::{element_integrals, fbar_max_closed};
use crate::povm;
use crate::prior::RadialPrior;
use crate::qlin::{self, BlochState, DenseOperator};

/// Cloner parameters (η, t); both enter linearly in the output state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClonerParams {
    pub eta: f64,
    pub t: f64,
}

/// The optimal universal 1→2 cloner.
pub const OPTIMAL_CLONER: ClonerParams = ClonerParams {
    eta: 2.0 / 3.0,
    t: 1.0 / 3.0,
};

impl ClonerParams {
    /// The four eigenvalues of the cloned state at Bloch radius b:
    /// ¼(1 ± 2bη + t), ¼(1 + t), ¼(1 − 3t).
    pub fn eigenvalues_at(&self, b: f64) -> [f64; 4] {
        [
            0.25 * (1.0 + 2.0 * b * self.eta + self.t),
            0.25 * (1.0 - 2.0 * b * self.eta + self.t),
            0.25 * (1.0 + self.t),
            0.25 * (1.0 - 3.0 * self.t),
        ]
    }

    /// Whether the output is a density matrix for every input radius; the
    /// eigenvalues are monotone in b, so the b = 1 extreme decides.
    pub fn is_physical(&self) -> bool {
        self.eigenvalues_at(1.0)
            .iter()
            .chain(self.eigenvalues_at(0.0).iter())
            .all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v))
    }

    fn validate(&self) -> Result<()> {
        let worst = self
            .eigenvalues_at(1.0)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if worst < -1e-12 {
            return Err(Error::UnphysicalCloner { eigenvalue: worst });
        }
        Ok(())
    }
}

/// The t interval keeping the cloner physical at the given η, if any:
/// 2|η| − 1 ≤ t ≤ 1/3. Empty exactly when |η| > 2/3.
pub fn feasible_t_range(eta: f64) -> Option<(f64, f64)> {
    let lo = (2.0 * eta.abs() - 1.0).max(-1.0);
    let hi = 1.0 / 3.0;
    (lo <= hi + 1e-15).then_some((lo, hi))
}

/// Applies the cloner to a single-qubit state, returning the two-qubit
/// output; rejects parameter pairs that are unphysical at b = 1.
pub fn clone_state(state: &BlochState, params: &ClonerParams) -> Result<DenseOperator> {
    params.validate()?;
    let paulis = qlin::pauli();
    let b = state.components();
    let id = DenseOperator::identity(1);
    let mut out = DenseOperator::identity(2);
    for (j, sigma) in paulis.iter().enumerate() {
        out = out.add(&sigma.kron(&id).scale(params.eta * b[j]));
        out = out.add(&id.kron(sigma).scale(params.eta * b[j]));
        out = out.add(&sigma.kron(sigma).scale(params.t));
    }
    let out = out.scale(0.25);
    let min = out.min_eigenvalue();
    if min < qlin::PSD_EIGENVALUE_FLOOR {
        return Err(Error::UnphysicalCloner { eigenvalue: min });
    }
    Ok(out)
}

/// Mean fidelity of the strategy "optimally clone one copy, then measure the
/// clone with the two-copy structure, with guesses re-optimized for the
/// clone's outcome distribution". Equals the single-copy closed form.
pub fn fbar_via_clone(prior: &RadialPrior, order: usize) -> Result<f64> {
    let structure = povm::build_povm_with_order(2, prior, order)?;
    let state_of =
        |b: &BlochState| clone_state(b, &OPTIMAL_CLONER).expect("optimal cloner is physical");
    let mut total = 0.0;
    for e in structure.elements() {
        let ints = element_integrals(&e.operator, e.direction, &state_of, prior, order, 8);
        total += ints.optimal();
    }
    Ok(total)
}

/// Convenience: the single-copy closed form this strategy must reproduce.
pub fn single_copy_reference(prior: &RadialPrior, order: usize) -> Result<f64> {
    Ok(fbar_max_closed(prior, 1, order)?.value_closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{self, reference_two_point};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ORDER: usize = 64;

    #[test]
    fn eigenvalues_at_zero_input() {
        let params = ClonerParams { eta: 0.5, t: 0.2 };
        let rho = clone_state(&BlochState::zero(), &params).unwrap();
        let mut evs = rho.eigenvalues();
        evs.sort_by(f64::total_cmp);
        let mut expected = vec![
            0.25 * (1.0 - 3.0 * 0.2),
            0.25 * (1.0 + 0.2),
            0.25 * (1.0 + 0.2),
            0.25 * (1.0 + 0.2),
        ];
        expected.sort_by(f64::total_cmp);
        for (got, want) in evs.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-13);
        }
    }

    #[test]
    fn optimal_cloner_on_a_pure_state() {
        let up = BlochState::new([0.0, 0.0, 1.0]).unwrap();
        let rho = clone_state(&up, &OPTIMAL_CLONER).unwrap();
        let mut evs = rho.eigenvalues();
        evs.sort_by(f64::total_cmp);
        let expected = [0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
        for (got, want) in evs.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
        assert!(rho.is_hermitian(1e-13));
    }

    #[test]
    fn optimal_clone_lives_in_the_triplet_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let singlet = qlin::singlet_projector();
        for _ in 0..25 {
            let b = random_bloch(&mut rng);
            let rho = clone_state(&b, &OPTIMAL_CLONER).unwrap();
            assert!(singlet.trace_product_re(&rho).abs() < 1e-12);
        }
    }

    #[test]
    fn triplet_product_probabilities() {
        // ⟨n̂n̂| ρ_c |n̂n̂⟩ = (1 + b⃗·n̂)/3 for the optimal cloner
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..25 {
            let b = random_bloch(&mut rng);
            let rho = clone_state(&b, &OPTIMAL_CLONER).unwrap();
            let dir = random_direction(&mut rng);
            let ket = qlin::ket_kron(&qlin::ket_along(dir), &qlin::ket_along(dir));
            let got = rho.expectation(&ket).re;
            let dot = b.components()[0] * dir[0]
                + b.components()[1] * dir[1]
                + b.components()[2] * dir[2];
            assert_abs_diff_eq!(got, (1.0 + dot) / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cloning_then_measuring_matches_single_copy_optimum() {
        for prior in [
            RadialPrior::pure(),
            reference_two_point(),
            RadialPrior::uniform_ball(),
        ] {
            let via_clone = fbar_via_clone(&prior, ORDER).unwrap();
            let reference = single_copy_reference(&prior, ORDER).unwrap();
            assert_abs_diff_eq!(via_clone, reference, epsilon = 1e-8);
        }
        // and the pure-prior value is the known 2/3
        assert_abs_diff_eq!(
            fbar_via_clone(&RadialPrior::pure(), ORDER).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn equivalence_holds_on_random_priors() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..5 {
            let p = prior::random_prior(&mut rng);
            let via_clone = fbar_via_clone(&p, ORDER).unwrap();
            let reference = single_copy_reference(&p, ORDER).unwrap();
            assert_abs_diff_eq!(via_clone, reference, epsilon = 1e-8);
        }
    }

    #[test]
    fn shrinking_beyond_two_thirds_is_unphysical() {
        for k in 0..=100 {
            let eta = k as f64 / 100.0;
            let feasible = feasible_t_range(eta).is_some();
            assert_eq!(feasible, eta <= 2.0 / 3.0 + 1e-12, "η = {eta}");
            if let Some((lo, hi)) = feasible_t_range(eta) {
                assert!(ClonerParams { eta, t: lo }.is_physical());
                assert!(ClonerParams { eta, t: hi }.is_physical());
            } else {
                // even the least-damaging t fails the b = 1 eigenvalue check
                let best_t = 1.0 / 3.0;
                let params = ClonerParams { eta, t: best_t };
                assert!(params.eigenvalues_at(1.0)[1] < 0.0);
                assert!(clone_state(&BlochState::new([0.0, 0.0, 1.0]).unwrap(), &params).is_err());
            }
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

    fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-3 && n <= 1.0 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }
}
