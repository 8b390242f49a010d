//! Discrete Itô formulas for random walks and weak schemes, the
//! finite-difference equations they induce, and Monte Carlo / quasi-Monte
//! Carlo simulation of those schemes.
//!
//! * [`basis`]: increment laws, orthonormal bases of `L²(ν)`, Walsh functions.
//! * [`scheme`]: stochastic difference equations, drivers, samplers, paths.
//! * [`dif`]: one-step martingale / drift / correction decompositions.
//! * [`fdsolver`]: `(∂^N_t + L^N) u = 0` on reachable-state lattices.
//! * [`montecarlo`]: estimators and weak-order fits.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN.

pub mod basis;
pub mod dif;
pub mod fdsolver;
pub mod montecarlo;
pub mod scalar;
pub mod scheme;
pub mod stats;

pub use scalar::Real;

pub type IncrementLaw64 = basis::IncrementLaw<f64>;
pub type IncrementLaw32 = basis::IncrementLaw<f32>;
pub type OrthonormalSystem64 = basis::OrthonormalSystem<f64>;
pub type OrthonormalSystem32 = basis::OrthonormalSystem<f32>;
pub type StatePoint64 = dif::StatePoint<f64>;
pub type StatePoint32 = dif::StatePoint<f32>;
pub type ChaosDecomposition64 = dif::ChaosDecomposition<f64>;
pub type ChaosDecomposition32 = dif::ChaosDecomposition<f32>;
pub type SchemeField64 = scheme::SchemeField<f64>;
pub type SchemeField32 = scheme::SchemeField<f32>;
pub type DriverKind64 = scheme::DriverKind<f64>;
pub type DriverKind32 = scheme::DriverKind<f32>;
pub type JointLaw64 = scheme::JointLaw<f64>;
pub type JointLaw32 = scheme::JointLaw<f32>;
pub type Path64 = scheme::Path<f64>;
pub type Path32 = scheme::Path<f32>;
pub type LatticeSolution64 = fdsolver::LatticeSolution<f64>;
pub type LatticeSolution32 = fdsolver::LatticeSolution<f32>;
pub type DiscreteGenerator64 = fdsolver::DiscreteGenerator<f64>;
pub type DiscreteGenerator32 = fdsolver::DiscreteGenerator<f32>;
pub type Polynomial64 = fdsolver::Polynomial<f64>;
pub type Polynomial32 = fdsolver::Polynomial<f32>;
pub type EstimatorConfig64 = montecarlo::EstimatorConfig<f64>;
pub type EstimatorConfig32 = montecarlo::EstimatorConfig<f32>;
pub type EstimatorRun64 = montecarlo::EstimatorRun<f64>;
pub type EstimatorRun32 = montecarlo::EstimatorRun<f32>;
