//! Mean-fidelity evaluation.
//!
//! Three routes to the same number, kept deliberately separate so they can
//! cross-check each other:
//!
//! 1. [`fbar_max_closed`] — the general closed form
//!    F̄ = ½ + Σ_s (2s+1) d_N(s) √(g₁² + g₂²);
//! 2. [`fbar_specialized`] — the per-N closed forms for N ≤ 4 written in
//!    terms of the radial moments I_α only;
//! 3. [`fbar_direct`] — direct integration of probability × fidelity over
//!    outcomes and prior, with outcome probabilities taken from matrix
//!    traces against the actual POVM operators, not from any closed form.
//!
//! The direct route reduces each outcome to a 2-D quadrature: the integrand
//! depends only on the Bloch radius and the polar angle against that
//! element's direction, so the azimuthal integral is trivial by isotropy.

use crate::error::{Error, Result};
use crate::povm::Povm;
use crate::prior::{self, RadialPrior};
use crate::qlin::{self, BlochState, DenseOperator};
use crate::quad::GaussLegendre;

/// Agreement tolerance between the closed form and direct integration.
pub const DIRECT_TOLERANCE: f64 = 1e-8;

/// One sector's share of the closed-form fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorTerm {
    pub twice_s: u32,
    /// (2s+1) d_N(s) √(g₁²+g₂²), the amount above ½ this sector adds.
    pub term: f64,
    /// Guess magnitude r_{N,s}.
    pub guess_r: f64,
}

/// Closed-form fidelity with its per-sector breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub n_copies: u32,
    pub prior_id: String,
    pub value_closed: f64,
    /// Filled when a direct evaluation was requested alongside.
    pub value_direct: Option<f64>,
    pub per_sector: Vec<SectorTerm>,
}

impl FidelityReport {
    pub fn abs_diff(&self) -> Option<f64> {
        self.value_direct.map(|d| (self.value_closed - d).abs())
    }
}

/// Maximal mean fidelity by the general closed form.
pub fn fbar_max_closed(prior: &RadialPrior, n_copies: u32, order: usize) -> Result<FidelityReport> {
    let sectors = crate::povm::sectors(n_copies)?;
    let mut value = 0.5;
    let mut per_sector = Vec::with_capacity(sectors.len());
    for sector in sectors {
        let (g1, g2) = prior::g_integrals(prior, n_copies, sector.twice_s, order)?;
        let norm = g1.hypot(g2);
        let term = (sector.twice_s as f64 + 1.0) * sector.multiplicity as f64 * norm;
        let guess_r = if norm < 1e-300 { 0.0 } else { g2 / norm };
        value += term;
        per_sector.push(SectorTerm {
            twice_s: sector.twice_s,
            term,
            guess_r,
        });
    }
    debug_assert!((0.5..=1.0 + 1e-9).contains(&value));
    Ok(FidelityReport {
        n_copies,
        prior_id: prior.id().to_string(),
        value_closed: value,
        value_direct: None,
        per_sector,
    })
}

/// The per-N closed forms for N ∈ {1, 2, 3, 4} in terms of the moments I_α.
///
/// Implemented independently of the general g-integral route; agreement with
/// [`fbar_max_closed`] is a regression check, not a construction.
pub fn fbar_specialized(prior: &RadialPrior, n_copies: u32, order: usize) -> Result<f64> {
    // I_α indexed by 2α
    let i = |twice_alpha: u32| prior::moment_i(prior, twice_alpha, order);
    let value = match n_copies {
        1 => {
            let (i_half, i_one) = (i(1), i(2));
            0.5 * (1.0 + (36.0 * i_half * i_half + (1.0 - 4.0 * i_one).powi(2)).sqrt() / 3.0)
        }
        2 => {
            let (i_half, i_one, i_3half) = (i(1), i(2), i(3));
            0.5 + i_3half
                + 0.25
                    * (16.0 * (i_half - i_3half).powi(2) + (1.0 - 4.0 * i_one).powi(2)).sqrt()
        }
        3 => {
            let (i_half, i_one, i_3half, i_two) = (i(1), i(2), i(3), i(4));
            0.5 + (36.0 * i_3half * i_3half + (i_one - 4.0 * i_two).powi(2)).sqrt() / 3.0
                + 0.1
                    * (100.0 * (i_half - 2.0 * i_3half).powi(2)
                        + (3.0 - 14.0 * i_one + 8.0 * i_two).powi(2))
                    .sqrt()
        }
        4 => {
            let (i_half, i_one, i_3half, i_two, i_5half) = (i(1), i(2), i(3), i(4), i(5));
            0.5 + 2.0 * i_5half
                + ((2.0 - 11.0 * i_one + 12.0 * i_two).powi(2)
                    + 36.0 * (i_half - 3.0 * i_3half + i_5half).powi(2))
                .sqrt()
                    / 6.0
                + 0.75
                    * ((i_one - 4.0 * i_two).powi(2)
                        + 16.0 * (i_3half - i_5half).powi(2))
                    .sqrt()
        }
        _ => return Err(Error::UnsupportedCopies { n_copies }),
    };
    Ok(value)
}

/// The three quadrature accumulators a single outcome needs: with guess
/// Bloch vector r⃗ its mean-fidelity contribution is
/// ½ (prob_mass + lin · r⃗·n̂ + sqrt_part · √(1−|r⃗|²)).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct ElementIntegrals {
    /// ∫ dΩ db b² f(b) Tr(O ρ_b): the outcome's total probability.
    pub prob_mass: f64,
    /// Same integral with an extra b·u factor (u the polar cosine).
    pub lin: f64,
    /// Same integral with an extra √(1−b²) factor.
    pub sqrt_part: f64,
}

impl ElementIntegrals {
    /// Contribution for a guess with component `r_par` along the element
    /// direction and total radius `r_norm`.
    pub fn with_guess(&self, r_par: f64, r_norm: f64) -> f64 {
        0.5 * (self.prob_mass
            + self.lin * r_par
            + self.sqrt_part * (1.0 - r_norm * r_norm).max(0.0).sqrt())
    }

    /// Contribution maximized over the guess; the optimum lies along the
    /// element direction with radius lin/√(lin²+sqrt²).
    pub fn optimal(&self) -> f64 {
        0.5 * (self.prob_mass + self.lin.hypot(self.sqrt_part))
    }
}

/// An orthonormal companion to `n`, used to span polar angles against it.
fn orthogonal_direction(n: [f64; 3]) -> [f64; 3] {
    let helper = if n[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let cross = [
        n[1] * helper[2] - n[2] * helper[1],
        n[2] * helper[0] - n[0] * helper[2],
        n[0] * helper[1] - n[1] * helper[0],
    ];
    let nn = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    [cross[0] / nn, cross[1] / nn, cross[2] / nn]
}

/// Quadrature of the element's probability integrals, with the N-copy state
/// supplied by `state_of` (tensor power, cloner output, …) and probabilities
/// taken as matrix traces. One radial pass accumulates all three integrals.
pub(crate) fn element_integrals(
    operator: &DenseOperator,
    direction: [f64; 3],
    state_of: &dyn Fn(&BlochState) -> DenseOperator,
    prior: &RadialPrior,
    radial_order: usize,
    angular_order: usize,
) -> ElementIntegrals {
    let e1 = orthogonal_direction(direction);
    let angular = GaussLegendre::new(angular_order);
    let [prob_mass, lin, sqrt_part] = prior.radial_average_n(radial_order, |b| {
        let root = (1.0 - b * b).max(0.0).sqrt();
        let mut p_ang = 0.0;
        let mut l_ang = 0.0;
        for (&u, &w) in angular.nodes().iter().zip(angular.weights()) {
            let sin = (1.0 - u * u).max(0.0).sqrt();
            let bloch = BlochState::new([
                b * (u * direction[0] + sin * e1[0]),
                b * (u * direction[1] + sin * e1[1]),
                b * (u * direction[2] + sin * e1[2]),
            ])
            .expect("radius b ≤ 1");
            let state = state_of(&bloch);
            let trace = operator.trace_product_re(&state);
            p_ang += 0.5 * w * trace;
            l_ang += 0.5 * w * trace * b * u;
        }
        [p_ang, l_ang, p_ang * root]
    });
    ElementIntegrals {
        prob_mass,
        lin,
        sqrt_part,
    }
}

/// The tensor-power state map for an N-copy POVM.
pub(crate) fn tensor_power_state(n_copies: u32) -> impl Fn(&BlochState) -> DenseOperator {
    move |b: &BlochState| {
        qlin::tensor_power(&qlin::density_from_bloch(b), n_copies as usize)
            .expect("within cap")
    }
}

/// The per-element integrals of a POVM under its natural state map.
pub(crate) fn povm_element_integrals(
    povm: &Povm,
    prior: &RadialPrior,
    radial_order: usize,
) -> Vec<ElementIntegrals> {
    let state_of = tensor_power_state(povm.n_copies());
    let angular_order = (povm.n_copies() as usize + 4).max(8);
    povm.elements()
        .iter()
        .map(|e| {
            element_integrals(
                &e.operator,
                e.direction,
                &state_of,
                prior,
                radial_order,
                angular_order,
            )
        })
        .collect()
}

/// Mean fidelity by direct integration with the elements' own guesses,
/// including a node-doubling convergence check.
pub fn fbar_direct(povm: &Povm, prior: &RadialPrior, order: usize) -> Result<f64> {
    let residual = povm.identity_residual();
    if residual > crate::povm::IDENTITY_TOLERANCE {
        return Err(Error::IdentityResolution { residual });
    }
    let coarse = fbar_direct_unchecked(povm, prior, order);
    if !prior.has_smooth_part() {
        // point-mass radial parts are evaluated exactly; nothing to double
        return Ok(coarse);
    }
    let fine = fbar_direct_unchecked(povm, prior, 2 * order);
    let delta = (coarse - fine).abs();
    if delta > DIRECT_TOLERANCE {
        return Err(Error::QuadratureNonConvergence { delta });
    }
    Ok(fine)
}

fn fbar_direct_unchecked(povm: &Povm, prior: &RadialPrior, order: usize) -> f64 {
    povm_element_integrals(povm, prior, order)
        .iter()
        .zip(povm.elements())
        .map(|(ints, e)| ints.with_guess(e.guess_r, e.guess_r))
        .sum()
}

/// Mean fidelity with an arbitrary guess per element (one override each).
pub fn fbar_with_guesses(
    povm: &Povm,
    prior: &RadialPrior,
    guesses: &[BlochState],
    order: usize,
) -> Result<f64> {
    if guesses.len() != povm.elements().len() {
        return Err(Error::GuessCountMismatch {
            expected: povm.elements().len(),
            got: guesses.len(),
        });
    }
    let integrals = povm_element_integrals(povm, prior, order);
    Ok(integrals
        .iter()
        .zip(povm.elements())
        .zip(guesses)
        .map(|((ints, e), guess)| {
            let g = guess.components();
            let r_par = g[0] * e.direction[0] + g[1] * e.direction[1] + g[2] * e.direction[2];
            ints.with_guess(r_par, guess.radius())
        })
        .sum())
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn format_17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quotes a CSV field when it contains separators (RFC 4180).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header for the fidelity CSV table.
pub fn csv_header() -> &'static str {
    "n_copies,prior_id,fbar_closed,fbar_direct,abs_diff,sector_guesses"
}

impl FidelityReport {
    /// One CSV row; file outputs carry 17 significant digits.
    pub fn csv_row(&self) -> String {
        let direct = self
            .value_direct
            .map(format_17)
            .unwrap_or_default();
        let diff = self
            .abs_diff()
            .map(format_17)
            .unwrap_or_default();
        let sectors = self
            .per_sector
            .iter()
            .map(|t| format!("2s={}:r={}", t.twice_s, format_17(t.guess_r)))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{}",
            self.n_copies,
            csv_field(&self.prior_id),
            format_17(self.value_closed),
            direct,
            diff,
            sectors
        )
    }
}
