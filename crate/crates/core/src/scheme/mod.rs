//! Stochastic difference equations `X_{k+1} = X_k + F(X_k, Δt, y_k)` and
//! their simulation under finite, Gaussian or Walsh innovations.

mod driver;
mod field;
mod path;
mod sampler;

pub use driver::{DriverKind, DriverSource, JointLaw, Outcome, MAX_ENUMERATED_RESOLUTION};
pub use field::{Diffusion, FieldKind, SchemeField, StateMap, UpdateMap};
pub use path::{
    enumerate_paths, format_sig17, simulate_path, simulate_path_indexed, Path, TimeGrid, MAX_ENUMERATED_PATHS,
};
pub use sampler::{QmcKind, Sampler, SOBOL_MAX_DIMENSION, SOBOL_MAX_POINTS};

use thiserror::Error;

use crate::basis::{BasisError, LawKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("number of steps must be positive")]
    ZeroSteps,
    #[error("horizon must be positive and finite (got {0})")]
    NonPositiveHorizon(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("{paths} paths exceed the enumeration bound of 10^6")]
    ExplosionGuard { paths: u128 },
    #[error("{0:?} innovations cannot be enumerated")]
    NotEnumerable(LawKind),
    #[error("dyadic resolution {0} is too fine to enumerate")]
    ResolutionTooFine(u32),
    #[error("invalid joint law: {0}")]
    InvalidLaw(String),
    #[error("Sobol points have at most {max} dimensions, {dimension} requested")]
    QmcDimension { dimension: usize, max: usize },
    #[error("a scrambled Sobol sequence has at most {max} points, {points} requested")]
    QmcPoints { points: u64, max: u64 },
    #[error(transparent)]
    Basis(#[from] BasisError),
}
