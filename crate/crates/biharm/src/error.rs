//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain dimension must be 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("cell {0} appears more than once; identical lattice cells overlap")]
    OverlappingCells(String),

    #[error("domain is not face-connected: cell {0} is unreachable from the first cell")]
    DisconnectedDomain(String),

    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteValue { at: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Input(String),

    #[error("refinement produces {dofs} degrees of freedom, above the cap {cap}")]
    RefinementOverflow { dofs: usize, cap: usize },

    #[error("derivative multi-index {0} has total order above 2")]
    BadMultiIndex(String),

    #[error("mass matrix is not positive definite: {0}")]
    MassNotPd(String),

    #[error("factorization of the shifted operator failed: {0}")]
    FactorizationFailed(String),

    #[error("eigensolve stalled: residual {residual:.3e} above {tol:.3e} after {sweeps} sweeps")]
    ConvergenceFailure {
        residual: f64,
        tol: f64,
        sweeps: usize,
    },

    #[error("requested {count} eigenpairs but the system has only {free} free dofs")]
    CountTooLarge { count: usize, free: usize },

    #[error("Rayleigh quotient of the zero vector is undefined")]
    ZeroVector,

    #[error("reference eigenvalue must be positive and finite, got {0}")]
    BadLambda(f64),

    #[error("no zero of the odd map found: best |g| = {best:.3e}, tolerance {tol:.3e}")]
    NoZeroFound { best: f64, tol: f64 },

    #[error("required orthogonality violated: residual {residual:.3e} above bound {bound:.3e}")]
    OrthogonalityDefect { residual: f64, bound: f64 },

    #[error("map failed the oddness spot-check: |g(-t) + g(t)| = {residual:.3e}")]
    NotOdd { residual: f64 },

    #[error("domain lacks a required reflection symmetry on axis {axis} (1-based)")]
    SymmetryMissing { axis: usize },

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("hybrid subspace is rank deficient: rank {rank}, expected {expected}")]
    RankDeficientSubspace { rank: usize, expected: usize },

    #[error("kernel defect: {0}")]
    KernelDefect(String),

    #[error("refinement ladder must be strictly increasing with at least 3 levels")]
    NonMonotoneLadder,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
