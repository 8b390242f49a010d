//! The finite-difference terminal-value problem `(∂^N_t + L^N) u = 0` on the
//! lattice of states a scheme can reach, its source form, and consistency
//! checks against a continuous generator.
//!
//! `∂^N_t u(t, x) = N {u(t + 1/N, x) - u(t, x)}` and
//! `L^N u(t, x) = N Σ_i {u(t + 1/N, x + F(x, 1/N, y_i)) - u(t + 1/N, x)} ν(y_i)`,
//! so the equation is the backward induction
//! `u(t_k, x) = Σ_i u(t_{k+1}, x + F(x, Δt, y_i)) ν(y_i)`.

mod bound;
mod generator;
mod lattice;

pub use bound::{
    error_bound_decomposition, root_error_slope, BoundProbe, ErrorBoundReport, Reference, INTERPOLATION_NODES,
};
pub use generator::{
    consistency_defect, integrated_consistency_defect, ContinuousGenerator, DiscreteGenerator, Polynomial,
    MAX_TEST_DEGREE,
};
pub use lattice::{
    backward_solve, feynman_kac_source, Lattice, LatticeOptions, LatticeSolution, DEFAULT_KEY_DIGITS,
    DEFAULT_NODE_BUDGET, ZERO_SNAP,
};

use thiserror::Error;

use crate::scheme::SchemeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("lattice grew to {nodes} nodes, over the budget of {budget}; coarsen the state key (fewer key digits) or use fewer steps")]
    NodeBudgetExceeded { nodes: usize, budget: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("value became non-finite at step {step}")]
    NonFiniteValue { step: usize },
    #[error("unsupported test function: {0}")]
    UnsupportedTestFunction(String),
    #[error("coarse grid with {coarse} steps does not divide the fine grid with {fine} steps on the same horizon")]
    GridMismatch { coarse: usize, fine: usize },
    #[error("reference has no value for a coarse state at time index {time_index}")]
    MissingReferenceState { time_index: usize },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}
