//! Named invariant suites with residuals, run by the CLI `verify` command.
//!
//! Every check reports the measured residual next to its tolerance so a
//! failure pinpoints which structural claim broke. Randomized checks draw
//! from an explicit seed recorded in the report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloning;
use crate::design;
use crate::error::Result;
use crate::fidelity;
use crate::oracle;
use crate::povm;
use crate::prior::{self, RadialPrior};
use crate::qlin::{self, BlochState, QubitPermutation};

/// One invariant with its measured residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

/// Full verification report for one (N, prior) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n_copies: u32,
    pub prior_id: String,
    pub seed: u64,
    pub quadrature_order: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
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

fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> QubitPermutation {
    let mut map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        map.swap(i, j);
    }
    QubitPermutation::new(map).unwrap()
}

/// Runs every module's invariant suite for the given configuration.
pub fn run_suites(
    n_copies: u32,
    prior: &RadialPrior,
    seed: u64,
    order: usize,
    design_file: Option<&design::DirectionSet>,
) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let n = n_copies as usize;

    // operator algebra: permutation and spin invariances of ρ^⊗N
    {
        let rho_n = qlin::tensor_power(&qlin::density_from_bloch(&random_bloch(&mut rng)), n)?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = qlin::permutation_operator(&QubitPermutation::transposition(n, i, j)?);
                worst = worst.max(v.commutator_max_norm(&rho_n));
            }
        }
        checks.push(Check::new("qlin.permutation_commutators", worst, 1e-12));

        let mut worst: f64 = 0.0;
        for m in 1..=n {
            let subset: Vec<usize> = (0..m).collect();
            let s2 = qlin::total_spin_squared(n, &subset)?;
            worst = worst.max(s2.commutator_max_norm(&rho_n));
        }
        checks.push(Check::new("qlin.spin_commutators", worst, 1e-12));

        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let p = random_permutation(&mut rng, n.max(2));
            let q = random_permutation(&mut rng, n.max(2));
            let lhs = qlin::permutation_operator(&p).matmul(&qlin::permutation_operator(&q));
            let rhs = qlin::permutation_operator(&p.compose(&q));
            worst = worst.max(lhs.sub(&rhs).max_norm());
        }
        checks.push(Check::new("qlin.permutation_homomorphism", worst, 1e-12));

        // spectrum multiplicities of S⃗² match (2s+1)·d_N(s)
        let s2 = qlin::total_spin_squared(n, &(0..n).collect::<Vec<_>>())?;
        let evs = s2.eigenvalues();
        let mut mismatch = 0.0;
        for ts in qlin::sector_twice_spins(n_copies) {
            let s = ts as f64 / 2.0;
            let found = evs
                .iter()
                .filter(|v| (**v - s * (s + 1.0)).abs() < 1e-8)
                .count() as i64;
            let expected = ((ts as u64 + 1) * qlin::spin_multiplicity(n_copies, ts)) as i64;
            mismatch += (found - expected).abs() as f64;
        }
        checks.push(Check::new("qlin.sector_multiplicities", mismatch, 0.0));

        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let a = random_bloch(&mut rng);
            let b = random_bloch(&mut rng);
            let uhl = qlin::uhlmann_fidelity(
                &qlin::density_from_bloch(&a),
                &qlin::density_from_bloch(&b),
            )?;
            worst = worst.max((uhl - qlin::fidelity_bloch(&a, &b)).abs());
        }
        checks.push(Check::new("qlin.uhlmann_vs_bloch_form", worst, 1e-10));
    }

    // prior: normalization, moment monotonicity, g-integral consistency
    {
        checks.push(Check::new(
            "prior.normalization",
            (prior.total_mass(order) - 1.0).abs(),
            prior::MASS_TOLERANCE,
        ));
        let moments = prior::moment_values(prior, 10, order);
        let mut floor: f64 = 0.0;
        for pair in moments.windows(3) {
            // I_α − 4 I_{α+1}, moments spaced by 2α = 2
            floor = floor.max(4.0 * pair[2].value - pair[0].value);
        }
        checks.push(Check::new("prior.moment_monotonicity", floor, 1e-12));
        checks.push(Check::new(
            "prior.moment_zero_is_one",
            (moments[0].value - 1.0).abs(),
            1e-9,
        ));

        let (g1, g2) = prior::g_integrals(prior, 1, 1, order)?;
        let i_half = prior::moment_i(prior, 1, order);
        let i_one = prior::moment_i(prior, 2, order);
        let residual = (g1 - i_half / 2.0)
            .abs()
            .max((g2 - (1.0 - 4.0 * i_one) / 12.0).abs());
        checks.push(Check::new("prior.g_vs_moment_identity", residual, 1e-10));

        let coarse = prior::moment_i(prior, 3, order);
        let fine = prior::moment_i(prior, 3, 2 * order);
        checks.push(Check::new(
            "prior.quadrature_convergence",
            (coarse - fine).abs(),
            1e-10,
        ));
    }

    // direction sets used by this N, plus any user-supplied file
    for ts in qlin::sector_twice_spins(n_copies) {
        if ts == 0 {
            continue;
        }
        let set = design::direction_set_for(ts)?;
        let report = design::verify_direction_set(&set);
        checks.push(Check::new(
            format!("design.residual_2s{ts}"),
            report.design_residual,
            design::DESIGN_TOLERANCE,
        ));
        checks.push(Check::new(
            format!("design.constraints_2s{ts}"),
            report.weight_sum_error.max(report.centroid_error),
            design::CONSTRAINT_TOLERANCE,
        ));
    }
    if let Some(set) = design_file {
        let report = design::verify_direction_set(set);
        checks.push(Check::new(
            format!("design.file_residual_2s{}", set.twice_s),
            report.design_residual,
            design::DESIGN_TOLERANCE,
        ));
        checks.push(Check::new(
            format!("design.file_constraints_2s{}", set.twice_s),
            report.weight_sum_error.max(report.centroid_error),
            design::CONSTRAINT_TOLERANCE,
        ));
    }

    // POVM structure
    let povm = povm::build_povm_with_order(n_copies, prior, order)?;
    {
        checks.push(Check::new(
            "povm.identity_resolution",
            povm.identity_residual(),
            povm::IDENTITY_TOLERANCE,
        ));
        let count_gap = povm::minimal_outcomes(n_copies)
            .map(|want| (povm.elements().len() as i64 - want as i64).abs() as f64)
            .unwrap_or(f64::INFINITY);
        checks.push(Check::new("povm.minimal_outcome_count", count_gap, 0.0));

        let mut rank_gap = 0.0;
        for e in povm.elements() {
            let rank = e.operator.numerical_rank(povm::RANK_THRESHOLD) as i64;
            rank_gap += (rank - e.sector.multiplicity as i64).abs() as f64;
        }
        checks.push(Check::new("povm.ranks_equal_multiplicities", rank_gap, 0.0));

        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let b = random_bloch(&mut rng);
            let e = &povm.elements()[rng.gen_range(0..povm.elements().len())];
            let closed = povm::outcome_probability(e, &b);
            let traced = povm::outcome_probability_trace(e, &b)?;
            worst = worst.max((closed - traced).abs());
        }
        checks.push(Check::new("povm.probability_closed_vs_trace", worst, 1e-10));

        let pure_b = BlochState::new([0.0, 0.0, 1.0]).unwrap();
        let leak: f64 = povm
            .elements()
            .iter()
            .filter(|e| e.sector.twice_s < n_copies)
            .map(|e| povm::outcome_probability_trace(e, &pure_b).unwrap_or(f64::INFINITY))
            .sum();
        checks.push(Check::new("povm.pure_state_sector_suppression", leak, 1e-12));
    }

    // fidelity: closed vs direct, specializations, guess dominance
    {
        let closed = fidelity::fbar_max_closed(prior, n_copies, order)?;
        let direct = fidelity::fbar_direct(&povm, prior, order)?;
        checks.push(Check::new(
            "fidelity.closed_vs_direct",
            (closed.value_closed - direct).abs(),
            fidelity::DIRECT_TOLERANCE,
        ));
        if n_copies <= 4 {
            let special = fidelity::fbar_specialized(prior, n_copies, order)?;
            checks.push(Check::new(
                "fidelity.specialized_consistency",
                (closed.value_closed - special).abs(),
                1e-12,
            ));
        }
        if n_copies > 1 {
            let previous = fidelity::fbar_max_closed(prior, n_copies - 1, order)?;
            checks.push(Check::new(
                "fidelity.monotone_in_copies",
                (previous.value_closed - closed.value_closed).max(0.0),
                1e-12,
            ));
        }
        let mut excess: f64 = 0.0;
        for _ in 0..20 {
            let overrides: Vec<BlochState> = povm
                .elements()
                .iter()
                .map(|_| random_bloch(&mut rng))
                .collect();
            let v = fidelity::fbar_with_guesses(&povm, prior, &overrides, order)?;
            excess = excess.max(v - closed.value_closed);
        }
        checks.push(Check::new("fidelity.guesses_never_beat_optimum", excess, 1e-9));
    }

    // cloning equivalence (single-copy statement, prior-dependent only)
    {
        let via_clone = cloning::fbar_via_clone(prior, order)?;
        let reference = cloning::single_copy_reference(prior, order)?;
        checks.push(Check::new(
            "cloning.measurement_equivalence",
            (via_clone - reference).abs(),
            1e-8,
        ));
        let singlet = qlin::singlet_projector();
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let b = random_bloch(&mut rng);
            let rho_c = cloning::clone_state(&b, &cloning::OPTIMAL_CLONER)?;
            worst = worst.max(singlet.trace_product_re(&rho_c).abs());
        }
        checks.push(Check::new("cloning.singlet_component_vanishes", worst, 1e-12));
    }

    // oracle: scans and free-guess optimization (bounded cost)
    {
        let mut worst_gap: f64 = 0.0;
        for ts in qlin::sector_twice_spins(n_copies) {
            if ts == 0 {
                continue;
            }
            let scan = oracle::scan_guess_magnitude(prior, n_copies, ts, 1e-3, order)?;
            worst_gap = worst_gap.max(scan.gap);
        }
        checks.push(Check::new("oracle.scan_matches_guess_rule", worst_gap, 1e-3));

        if n_copies <= 3 {
            let closed = fidelity::fbar_max_closed(prior, n_copies, order)?.value_closed;
            let opt = oracle::optimize_free_guesses(&povm, prior, order)?;
            checks.push(Check::new(
                "oracle.free_guess_recovery",
                (opt.value - closed).abs(),
                1e-6,
            ));
        }
        if n_copies == 1 {
            let scan = oracle::vonneumann_exhaustive_n1(prior, 24, order)?;
            checks.push(Check::new("oracle.vonneumann_isotropy", scan.spread, 1e-10));
            checks.push(Check::new(
                "oracle.vonneumann_matches_closed_form",
                scan.max_gap,
                1e-8,
            ));
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        n_copies,
        prior_id: prior.id().to_string(),
        seed,
        quadrature_order: order,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::reference_two_point;

    #[test]
    fn baseline_configurations_pass() {
        for (n, prior) in [
            (1u32, RadialPrior::pure()),
            (2, reference_two_point()),
            (3, RadialPrior::uniform_ball()),
        ] {
            let report = run_suites(n, &prior, 1234, 48, None).unwrap();
            assert!(
                report.pass,
                "N={n} {}: {:?}",
                prior.id(),
                report.first_failure()
            );
        }
    }

    #[test]
    fn corrupted_design_file_is_reported() {
        let mut set = design::builtin_direction_set(2).unwrap();
        set.entries[1].c_sq *= 1.02;
        let report = run_suites(1, &RadialPrior::pure(), 7, 48, Some(&set)).unwrap();
        assert!(!report.pass);
        let failure = report.first_failure().unwrap();
        assert!(failure.name.starts_with("design.file"), "{failure:?}");
        assert!(failure.residual > 1e-3);
    }

    #[test]
    fn json_serialization_is_stable() {
        let report = run_suites(1, &RadialPrior::pure(), 99, 32, None).unwrap();
        let json = report.to_json();
        let back: VerifyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }
}
