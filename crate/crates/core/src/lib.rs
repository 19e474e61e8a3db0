//! Optimal minimal measurements of mixed qubit states.
//!
//! Given N copies of an unknown qubit state drawn from an isotropic prior
//! over the Bloch ball, this crate constructs the minimal generalized
//! measurement (POVM) that maximizes the mean estimation fidelity, evaluates
//! the maximal mean fidelity both in closed form and by direct numerical
//! integration over outcomes and prior, and checks the structural invariants
//! of the construction (identity resolution, operator ranks, sector
//! dimensions, guess optimality).
//!
//! Module map:
//! - [`qlin`]: dense complex operator algebra on N-qubit spaces;
//! - [`prior`]: isotropic radial priors and their moment integrals;
//! - [`design`]: weighted direction sets resolving identity on symmetric
//!   subspaces, with built-ins and a numerical solver;
//! - [`povm`]: the minimal optimal POVM per copy count;
//! - [`fidelity`]: closed-form and direct mean-fidelity evaluation;
//! - [`cloning`]: the universal 1→2 cloner and its measurement equivalence;
//! - [`oracle`]: brute-force optimality checks;
//! - [`verify`]: named invariant suites with residual reports.

pub mod cloning;
pub mod design;
pub mod error;
pub mod fidelity;
pub mod oracle;
pub mod povm;
pub mod prior;
pub mod qlin;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
