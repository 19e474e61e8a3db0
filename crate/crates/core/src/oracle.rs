//! Independent brute-force checks that the closed-form guesses and the POVM
//! structure are actually optimal at desk scale.
//!
//! Everything here avoids the closed forms being tested: probabilities come
//! from matrix traces, and the angular integrals run over the full sphere in
//! a fixed lab frame, so no symmetry of the operators is assumed. For any
//! positive operator O and guess r⃗ the mean-fidelity contribution is
//!
//!   ½ (P + L⃗·r⃗ + S √(1−|r⃗|²)),   P = ∫ Tr(Oρ_b),  L⃗ = ∫ Tr(Oρ_b) b⃗,
//!                                   S = ∫ Tr(Oρ_b) √(1−b²),
//!
//! (integrals over the prior and the sphere), which the checks maximize by
//! scanning, by gradient ascent, and against structural perturbations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::coherent_state;
use crate::error::{Error, Result};
use crate::fidelity::{fbar_max_closed, fbar_specialized, povm_element_integrals};
use crate::povm::{self, Povm, PovmElement};
use crate::prior::RadialPrior;
use crate::qlin::{self, BlochState, DenseOperator};
use crate::quad::GaussLegendre;

/// Improvements below this are quadrature noise, not counterexamples.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-9;

/// Result of a one-dimensional parameter scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Human-readable description of the grid that was scanned.
    pub grid: String,
    pub best_value: f64,
    pub best_parameter: f64,
    /// The closed-form prediction for the optimal parameter.
    pub prediction: f64,
    /// |best_parameter − prediction|; bounded by the grid step.
    pub gap: f64,
}

/// Full-sphere integrals of one positive operator against the prior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FullIntegrals {
    pub prob_mass: f64,
    pub lin_vec: [f64; 3],
    pub sqrt_part: f64,
}

impl FullIntegrals {
    pub fn value_at(&self, guess: &BlochState) -> f64 {
        let g = guess.components();
        let dot = self.lin_vec[0] * g[0] + self.lin_vec[1] * g[1] + self.lin_vec[2] * g[2];
        0.5 * (self.prob_mass
            + dot
            + self.sqrt_part * (1.0 - guess.radius().powi(2)).max(0.0).sqrt())
    }

    /// Maximal contribution over all guesses in the Bloch ball.
    pub fn optimal(&self) -> f64 {
        let l = (self.lin_vec[0] * self.lin_vec[0]
            + self.lin_vec[1] * self.lin_vec[1]
            + self.lin_vec[2] * self.lin_vec[2])
            .sqrt();
        0.5 * (self.prob_mass + l.hypot(self.sqrt_part))
    }
}

/// Integrates every operator against the prior over the full sphere (polar
/// Gauss–Legendre × azimuthal trapezoid, both spectrally accurate here) with
/// one state build per node, shared across operators.
pub fn full_integrals(
    operators: &[&DenseOperator],
    state_of: &dyn Fn(&BlochState) -> DenseOperator,
    prior: &RadialPrior,
    radial_order: usize,
    polar_order: usize,
    azimuth_order: usize,
) -> Vec<FullIntegrals> {
    let polar = GaussLegendre::new(polar_order);
    let n_ops = operators.len();
    let mut acc = vec![0.0; 5 * n_ops];
    prior.radial_average_dyn(
        radial_order,
        |b, out| {
            out.fill(0.0);
            let root = (1.0 - b * b).max(0.0).sqrt();
            for (&u, &wu) in polar.nodes().iter().zip(polar.weights()) {
                let sin = (1.0 - u * u).max(0.0).sqrt();
                for m in 0..azimuth_order {
                    let phi = 2.0 * std::f64::consts::PI * m as f64 / azimuth_order as f64;
                    // angular measure: (1/4π) dΩ = (wu/2) · (1/azimuth)
                    let w = 0.5 * wu / azimuth_order as f64;
                    let bvec = [b * sin * phi.cos(), b * sin * phi.sin(), b * u];
                    let state = state_of(&BlochState::new(bvec).expect("b ≤ 1"));
                    for (k, op) in operators.iter().enumerate() {
                        let t = w * op.trace_product_re(&state);
                        out[5 * k] += t;
                        out[5 * k + 1] += t * bvec[0];
                        out[5 * k + 2] += t * bvec[1];
                        out[5 * k + 3] += t * bvec[2];
                        out[5 * k + 4] += t * root;
                    }
                }
            }
        },
        &mut acc,
    );
    (0..n_ops)
        .map(|k| FullIntegrals {
            prob_mass: acc[5 * k],
            lin_vec: [acc[5 * k + 1], acc[5 * k + 2], acc[5 * k + 3]],
            sqrt_part: acc[5 * k + 4],
        })
        .collect()
}

/// 1-D scan of a sector's fidelity contribution over the guess magnitude
/// r ∈ [−1, 1]; the argmax must match r_{N,s} within one grid step.
pub fn scan_guess_magnitude(
    prior: &RadialPrior,
    n_copies: u32,
    twice_s: u32,
    step: f64,
    order: usize,
) -> Result<ScanResult> {
    assert!(step > 0.0 && step <= 1e-3, "grid resolution must be ≤ 1e-3");
    let povm = povm::build_povm_with_order(n_copies, prior, order)?;
    let integrals = povm_element_integrals(&povm, prior, order);
    let sector: Vec<_> = povm
        .elements()
        .iter()
        .zip(&integrals)
        .filter(|(e, _)| e.sector.twice_s == twice_s)
        .collect();
    if sector.is_empty() {
        return Err(Error::ParityMismatch { n_copies, twice_s });
    }
    let steps = (2.0 / step).round() as usize;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_parameter = 0.0;
    for k in 0..=steps {
        let r = -1.0 + k as f64 * step;
        let value: f64 = sector
            .iter()
            .map(|(_, ints)| ints.with_guess(r, r.abs()))
            .sum();
        if value > best_value {
            best_value = value;
            best_parameter = r;
        }
    }
    let prediction = povm::guess_magnitude(prior, n_copies, twice_s, order)?;
    Ok(ScanResult {
        grid: format!("r in [-1, 1], step {step:.0e}"),
        best_value,
        best_parameter,
        prediction,
        gap: (best_parameter - prediction).abs(),
    })
}

/// Free-guess optimization outcome.
#[derive(Debug, Clone)]
pub struct OptimizedGuesses {
    pub value: f64,
    pub guesses: Vec<BlochState>,
}

/// Projected gradient ascent of one element's contribution over the whole
/// Bloch ball (central-difference gradients; the objective is concave).
fn ascend_guess(ints: &FullIntegrals, start: [f64; 3]) -> Result<BlochState> {
    let f = |v: [f64; 3]| -> f64 {
        FullIntegrals::value_at(ints, &BlochState::new(v).expect("projected"))
    };
    let project = |mut v: [f64; 3]| -> [f64; 3] {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1.0 - 1e-12 {
            let s = (1.0 - 1e-12) / n;
            for x in &mut v {
                *x *= s;
            }
        }
        v
    };
    let mut x = project(start);
    let mut fx = f(x);
    let h = 1e-7;
    let mut rate = 0.5;
    for _ in 0..500 {
        let mut grad = [0.0; 3];
        for a in 0..3 {
            let mut hi = x;
            let mut lo = x;
            hi[a] += h;
            lo[a] -= h;
            grad[a] = (f(project(hi)) - f(project(lo))) / (2.0 * h);
        }
        let gnorm = (grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]).sqrt();
        if gnorm < 1e-10 {
            break;
        }
        let mut improved = false;
        for _ in 0..40 {
            let cand = project([
                x[0] + rate * grad[0],
                x[1] + rate * grad[1],
                x[2] + rate * grad[2],
            ]);
            let fc = f(cand);
            if fc > fx {
                x = cand;
                fx = fc;
                rate *= 1.3;
                improved = true;
                break;
            }
            rate *= 0.5;
            if rate < 1e-14 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    BlochState::new(x).map_err(|_| Error::OptimizerFailure("left the Bloch ball".into()))
}

/// Independently maximizes the mean fidelity over every element's guess
/// Bloch vector, each optimized unconstrained over the ball.
pub fn optimize_free_guesses(
    povm: &Povm,
    prior: &RadialPrior,
    order: usize,
) -> Result<OptimizedGuesses> {
    let ops: Vec<&DenseOperator> = povm.elements().iter().map(|e| &e.operator).collect();
    let state_of = crate::fidelity::tensor_power_state(povm.n_copies());
    let polar = (povm.n_copies() as usize + 4).max(8);
    let azimuth = 2 * povm.n_copies() as usize + 8;
    let integrals = full_integrals(&ops, &state_of, prior, order, polar, azimuth);
    let mut value = 0.0;
    let mut guesses = Vec::with_capacity(ops.len());
    for (ints, element) in integrals.iter().zip(povm.elements()) {
        let mut best: Option<(f64, BlochState)> = None;
        let starts = [
            [0.0, 0.0, 0.0],
            [
                0.5 * element.direction[0],
                0.5 * element.direction[1],
                0.5 * element.direction[2],
            ],
            [0.31, -0.17, 0.42],
        ];
        for start in starts {
            let guess = ascend_guess(ints, start)?;
            let val = ints.value_at(&guess);
            if best.as_ref().is_none_or(|(b, _)| val > *b) {
                best = Some((val, guess));
            }
        }
        let (val, guess) = best.expect("three starts ran");
        if (val - ints.optimal()).abs() > 1e-6 {
            return Err(Error::OptimizerFailure(format!(
                "element stalled at {val}, reduced-form optimum {}",
                ints.optimal()
            )));
        }
        value += val;
        guesses.push(guess);
    }
    Ok(OptimizedGuesses { value, guesses })
}

/// Outcome of the structural perturbation probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    pub trials: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Trials whose guess-optimized fidelity beat the baseline by more than
    /// the improvement tolerance. Zero is the expected outcome.
    pub improvements: usize,
    /// Largest signed gain over the baseline among accepted trials.
    pub max_gain: f64,
    /// Guess-optimized fidelity of the unperturbed measurement.
    pub baseline: f64,
    pub closed_value: f64,
    pub step: f64,
    pub seed: u64,
}

/// Re-solves the sector weights for a set of perturbed directions by linear
/// least squares on the design condition; rejects negative weights.
fn resolve_weights(twice_s: u32, directions: &[[f64; 3]]) -> Option<Vec<f64>> {
    let d = twice_s as usize + 1;
    let n = directions.len();
    // d² complex design equations as 2d² real rows
    let mut a = DMatrix::zeros(2 * d * d, n);
    for (col, dir) in directions.iter().enumerate() {
        let chi = coherent_state(twice_s, *dir);
        for i in 0..d {
            for j in 0..d {
                let z = chi[i] * chi[j].conj();
                a[(2 * (i * d + j), col)] = z.re;
                a[(2 * (i * d + j) + 1, col)] = z.im;
            }
        }
    }
    let mut rhs = DVector::zeros(2 * d * d);
    for i in 0..d {
        rhs[2 * (i * d + i)] = 1.0;
    }
    let solution = a.svd(true, true).solve(&rhs, 1e-12).ok()?;
    let weights: Vec<f64> = solution.iter().copied().collect();
    if weights.iter().any(|&w| w < 0.0) {
        return None;
    }
    Some(weights)
}

/// Applies random direction perturbations, re-solves the weights, repairs the
/// operator sum back to an exact identity resolution, re-optimizes all
/// guesses, and reports whether any perturbation beats the optimum.
pub fn perturb_povm_check(
    povm: &Povm,
    prior: &RadialPrior,
    trials: usize,
    step: f64,
    seed: u64,
    order: usize,
) -> Result<PerturbReport> {
    assert!(step <= 1e-2, "perturbation step must be ≤ 1e-2");
    let n_copies = povm.n_copies();
    let state_of = crate::fidelity::tensor_power_state(n_copies);
    let polar = (n_copies as usize + 4).max(8);
    let azimuth = 2 * n_copies as usize + 8;
    let evaluate = |elements: &[DenseOperator]| -> f64 {
        let refs: Vec<&DenseOperator> = elements.iter().collect();
        full_integrals(&refs, &state_of, prior, order, polar, azimuth)
            .iter()
            .map(FullIntegrals::optimal)
            .sum()
    };

    let base_ops: Vec<DenseOperator> =
        povm.elements().iter().map(|e| e.operator.clone()).collect();
    let baseline = evaluate(&base_ops);
    let closed_value = fbar_max_closed(prior, n_copies, order)?.value_closed;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut rejected = 0;
    let mut improvements = 0;
    let mut max_gain = f64::NEG_INFINITY;
    for _ in 0..trials {
        let value = if step == 0.0 {
            baseline
        } else {
            match perturbed_value(povm, step, &mut rng, &evaluate) {
                Some(v) => v,
                None => {
                    rejected += 1;
                    continue;
                }
            }
        };
        accepted += 1;
        let gain = value - baseline;
        max_gain = max_gain.max(gain);
        if gain > IMPROVEMENT_TOLERANCE {
            improvements += 1;
        }
    }
    Ok(PerturbReport {
        trials,
        accepted,
        rejected,
        improvements,
        max_gain: if accepted > 0 { max_gain } else { 0.0 },
        baseline,
        closed_value,
        step,
        seed,
    })
}

fn perturbed_value(
    povm: &Povm,
    step: f64,
    rng: &mut ChaCha8Rng,
    evaluate: &dyn Fn(&[DenseOperator]) -> f64,
) -> Option<f64> {
    let n_copies = povm.n_copies();
    let mut operators: Vec<DenseOperator> = Vec::with_capacity(povm.elements().len());
    // group elements by sector, perturb directions, re-solve sector weights
    let mut sectors: Vec<u32> = povm.elements().iter().map(|e| e.sector.twice_s).collect();
    sectors.dedup();
    for &ts in &sectors {
        let members: Vec<&PovmElement> = povm
            .elements()
            .iter()
            .filter(|e| e.sector.twice_s == ts)
            .collect();
        if ts == 0 {
            operators.extend(members.iter().map(|e| e.operator.clone()));
            continue;
        }
        let perturbed: Vec<[f64; 3]> = members
            .iter()
            .map(|e| {
                let mut v = e.direction;
                for x in &mut v {
                    *x += step * gaussian(rng);
                }
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            })
            .collect();
        let weights = resolve_weights(ts, &perturbed)?;
        for (dir, w) in perturbed.iter().zip(weights) {
            operators.push(povm::build_element(n_copies, ts, *dir, w).ok()?);
        }
    }
    // repair Σ O back to the identity so the trial is a genuine POVM
    let mut sum = DenseOperator::zeros(n_copies as usize);
    for op in &operators {
        sum = sum.add(op);
    }
    let defect = sum
        .sub(&DenseOperator::identity(n_copies as usize))
        .max_norm();
    if defect > 0.5 {
        return None;
    }
    if defect > 1e-12 {
        let correction = sum.inv_sqrt_psd().ok()?;
        for op in &mut operators {
            *op = correction.matmul(op).matmul(&correction);
        }
    }
    Some(evaluate(&operators))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Scans two-point priors (mass m at radius b₀, mass 1−m at b₁) for the
/// minimizer of the single-copy maximal fidelity. The reference prior
/// (m, b₀, b₁) = (1/10, 0, 1) achieving (1+1/√10)/2 is conjectured to be
/// the minimum over all isotropic priors; this scan only probes the
/// two-point family and makes no claim beyond it.
pub fn scan_two_point_minimum(mass_steps: usize, radius_steps: usize, order: usize) -> ScanResult {
    let mut best_value = f64::INFINITY;
    let mut best_mass = 0.0;
    for i in 0..=mass_steps {
        let m = i as f64 / mass_steps as f64;
        for j in 0..=radius_steps {
            let b0 = j as f64 / radius_steps as f64;
            for k in 0..=radius_steps {
                let b1 = k as f64 / radius_steps as f64;
                let Ok(prior) = RadialPrior::two_point(m, b0, 1.0 - m, b1) else {
                    continue;
                };
                let value = fbar_max_closed(&prior, 1, order)
                    .expect("single copy always evaluates")
                    .value_closed;
                if value < best_value {
                    best_value = value;
                    best_mass = m;
                }
            }
        }
    }
    let prediction = 0.5 * (1.0 + 1.0 / 10.0f64.sqrt());
    ScanResult {
        grid: format!(
            "two-point priors, {mass_steps}+1 masses x ({radius_steps}+1)^2 radii"
        ),
        best_value,
        best_parameter: best_mass,
        prediction,
        gap: (best_value - prediction).abs(),
    }
}

/// Axis scan of the N = 1 projective (von Neumann) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisScanResult {
    pub grid: String,
    pub n_axes: usize,
    pub min_value: f64,
    pub max_value: f64,
    /// max − min across axes; isotropy makes this quadrature noise.
    pub spread: f64,
    /// The single-copy closed form every axis must reproduce.
    pub prediction: f64,
    pub max_gap: f64,
}

/// Evaluates the guess-optimized mean fidelity of the two-outcome projective
/// measurement along every axis of a Fibonacci grid.
pub fn vonneumann_exhaustive_n1(
    prior: &RadialPrior,
    n_axes: usize,
    order: usize,
) -> Result<AxisScanResult> {
    let state_of = |b: &BlochState| qlin::density_from_bloch(b);
    let prediction = fbar_specialized(prior, 1, order)?;
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    for i in 0..n_axes {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_axes as f64;
        let r = (1.0 - z * z).sqrt();
        let axis = [r * (golden * i as f64).cos(), r * (golden * i as f64).sin(), z];
        let plus = qlin::projector(&qlin::ket_along(axis)).expect("qubit ket");
        let minus = qlin::projector(&qlin::ket_along([-axis[0], -axis[1], -axis[2]]))
            .expect("qubit ket");
        let ints = full_integrals(&[&plus, &minus], &state_of, prior, order, 8, 10);
        let value: f64 = ints.iter().map(FullIntegrals::optimal).sum();
        min_value = min_value.min(value);
        max_value = max_value.max(value);
    }
    Ok(AxisScanResult {
        grid: format!("{n_axes} Fibonacci axes"),
        n_axes,
        min_value,
        max_value,
        spread: max_value - min_value,
        prediction,
        max_gap: (max_value - prediction).abs().max((min_value - prediction).abs()),
    })
}
