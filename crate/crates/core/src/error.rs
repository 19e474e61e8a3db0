//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, validation, and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Bloch vector: |b| = {norm} exceeds 1")]
    InvalidBloch { norm: f64 },

    #[error("size limit exceeded: {requested} copies requested, cap is {cap}")]
    SizeCap { requested: usize, cap: usize },

    #[error("qubit subset is empty")]
    EmptySubset,

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("mapping is not a bijection on 0..{n}")]
    NotAPermutation { n: usize },

    #[error("matrix dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },

    #[error("operator is not a valid density matrix: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("prior document malformed: {0}")]
    PriorSchema(String),

    #[error("prior normalization failed: total mass {total}, expected 1")]
    PriorNormalization { total: f64 },

    #[error("prior radius {radius} outside [0, 1]")]
    RadiusOutOfRange { radius: f64 },

    #[error("sector 2s = {twice_s} has wrong parity for {n_copies} copies")]
    ParityMismatch { n_copies: u32, twice_s: u32 },

    #[error("no built-in direction set for 2s = {twice_s}")]
    UnsupportedTwiceS { twice_s: u32 },

    #[error("no direction set available for 2s = {twice_s}")]
    MissingDirectionSet { twice_s: u32 },

    #[error("count {count} infeasible for 2s = {twice_s}: identity on a {dim}-dimensional space needs at least {dim} operators")]
    InfeasibleCount { twice_s: u32, count: usize, dim: usize },

    #[error("design solver did not converge: best residual {best_residual:.3e} after {restarts} restarts")]
    SolverFailure { best_residual: f64, restarts: usize },

    #[error("operators do not resolve the identity: max-norm residual {residual:.3e}")]
    IdentityResolution { residual: f64 },

    #[error("quadrature did not converge: node doubling moved the result by {delta:.3e}")]
    QuadratureNonConvergence { delta: f64 },

    #[error("guess override count {got} does not match element count {expected}")]
    GuessCountMismatch { expected: usize, got: usize },

    #[error("no specialized closed form for N = {n_copies}")]
    UnsupportedCopies { n_copies: u32 },

    #[error("cloner parameters unphysical: eigenvalue {eigenvalue} outside [0, 1]")]
    UnphysicalCloner { eigenvalue: f64 },

    #[error("optimizer failed: {0}")]
    OptimizerFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
