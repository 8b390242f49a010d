//! Increment laws and orthonormal systems of `L²(ν)`.
//!
//! Three families are supported:
//!
//! * finite-support laws, whose orthonormal polynomials are built by modified
//!   Gram–Schmidt with exact weighted summation over the atoms;
//! * centred Gaussian laws, handled the same way with a fixed 200-node
//!   Gauss–Hermite rule (Hermite polynomials come out, normalised);
//! * the Lebesgue measure on `[0, 1)`, whose orthonormal basis is the Walsh
//!   system generated by the Rademacher functions.

mod law;
mod orthonormal;
mod quadrature;
mod walsh;

pub use law::{Atom, IncrementLaw, LawKind};
pub use orthonormal::{gram_schmidt_basis, Cardinality, OrthonormalSystem};
pub use quadrature::{gauss_hermite_nodes, GAUSS_HERMITE_NODES};
pub use walsh::{
    dyadic_block_digits, dyadic_digits, dyadic_integral, rademacher, walsh_completion, walsh_driver_vector, walsh_eval,
    WalshIndex, MAX_DYADIC_RESOLUTION,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("increment law has no atoms")]
    EmptySupport,
    #[error("atom weights must be strictly positive (got {0})")]
    NonPositiveWeight(f64),
    #[error("atom weights sum to {0}, expected 1")]
    WeightsDoNotSumToOne(f64),
    #[error("atom {0} appears more than once")]
    DuplicateAtom(f64),
    #[error("points and weights have different lengths ({points} vs {weights})")]
    LengthMismatch { points: usize, weights: usize },
    #[error("non-finite value in law definition")]
    NonFinite,
    #[error("gaussian variance must be positive (got {0})")]
    NonPositiveVariance(f64),
    #[error("requested {count} basis functions but the law has only {atoms} atoms")]
    CountExceedsSupport { count: usize, atoms: usize },
    #[error("moment sequence is numerically degenerate at degree {degree}")]
    DegenerateMoments { degree: usize },
    #[error("basis count must be positive")]
    ZeroCount,
    #[error("polynomial Gram-Schmidt is not available for the {0:?} law")]
    UnsupportedLaw(LawKind),
    #[error("Rademacher index {0} exceeds the dyadic resolution of double precision (52)")]
    ResolutionExceeded(u32),
    #[error("Rademacher indices start at 1")]
    ZeroFactor,
    #[error("point {0} is outside [0, 1)")]
    OutOfUnitInterval(f64),
}
