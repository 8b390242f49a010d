//! Monte Carlo and randomized quasi-Monte Carlo estimation of `E[f(X_T)]`
//! for a scheme, and the weak-order harness built on it.

mod experiments;
mod order;

pub use experiments::{
    complete_market_experiment, gbm_cubic_sum_reference, gbm_field, high_dimension_smoke, mean_square,
    moment_matched_experiment, smooth_call, three_atom_obstruction_search, CompleteMarketReport, DesignMoments,
    HighDimensionReport, ObstructionSearch, COMPLETE_MARKET_GRID, MOMENT_MATCHED_GRID, MOMENT_MATCHED_REFERENCE_STEPS,
};
pub use order::{weak_order, OrderFit, OrderOptions, OrderPoint, OrderReference, MIN_GRID_POINTS};

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::fdsolver::FdError;
use crate::scalar::Real;
use crate::scheme::{DriverKind, Sampler, SchemeError, SchemeField, TimeGrid};
use crate::stats::mean_variance;

/// Terminal payoff `f(X_T)`.
pub type Payoff<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Fewest independent randomizations of a low-discrepancy sequence.
pub const MIN_RANDOMIZATIONS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("{samples} samples cannot be split into {randomizations} randomizations")]
    TooFewSamples { samples: u64, randomizations: usize },
    #[error("at least 8 randomizations are required (got {0})")]
    TooFewRandomizations(usize),
    #[error("path {path} became non-finite at step {step}")]
    NonFiniteState { path: u64, step: usize },
    #[error("payoff is non-finite on path {path}")]
    NonFinitePayoff { path: u64 },
    #[error("order grid needs at least 4 strictly increasing step counts (got {0:?})")]
    InvalidGrid(Vec<usize>),
    #[error("Monte Carlo noise {noise:e} at N = {steps} is not below the noise budget {budget:e}")]
    NoiseDominated { steps: usize, noise: f64, budget: f64 },
    #[error("errors are at rounding level (max {max_error:e}); no slope can be fitted")]
    DegenerateFit { max_error: f64 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Solver(#[from] FdError),
}

/// Everything that determines one estimate.
#[derive(Clone)]
pub struct EstimatorConfig<T> {
    pub field: SchemeField<T>,
    pub driver: DriverKind<T>,
    pub x0: Vec<T>,
    pub steps: usize,
    pub horizon: T,
    pub payoff: Payoff<T>,
    pub samples: u64,
    pub sampler: Sampler,
    /// Independent randomizations for low-discrepancy samplers.
    pub randomizations: usize,
}

impl<T: Real> std::fmt::Debug for EstimatorConfig<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EstimatorConfig")
            .field("field", &self.field)
            .field("driver", &self.driver)
            .field("x0", &self.x0)
            .field("steps", &self.steps)
            .field("horizon", &self.horizon)
            .field("samples", &self.samples)
            .field("sampler", &self.sampler)
            .field("randomizations", &self.randomizations)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun<T> {
    pub steps: usize,
    /// Paths actually simulated.
    pub samples: u64,
    pub estimate: T,
    /// `s/√M` for pseudo-random sampling; the standard deviation of the
    /// randomization means over `√R` for low-discrepancy sampling.
    pub standard_error: T,
    /// Seconds; not part of the reproducible output.
    pub wall_time: f64,
}

/// Simulates `config.samples` paths and averages the payoff. Paths are
/// independent of the thread count: path `i` always uses point `i` of its
/// sampler, and reductions use a fixed pairwise order.
pub fn estimate<T: Real>(config: &EstimatorConfig<T>) -> Result<EstimatorRun<T>, McError> {
    let start = Instant::now();
    if config.samples == 0 {
        return Err(McError::ZeroSamples);
    }
    if config.x0.len() != config.field.dimension() {
        return Err(SchemeError::DimensionMismatch { expected: config.field.dimension(), got: config.x0.len() }.into());
    }
    if config.driver.noise_dim() != config.field.noise_dim() {
        return Err(SchemeError::DimensionMismatch {
            expected: config.field.noise_dim(),
            got: config.driver.noise_dim(),
        }
        .into());
    }
    let grid = TimeGrid::uniform(config.horizon, config.steps)?;
    let (estimate, standard_error, samples) = match config.sampler {
        Sampler::PseudoRandom { .. } => {
            let values = payoff_values(config, &grid, config.sampler, config.samples)?;
            let (mean, var) = mean_variance(&values);
            (mean, (var / T::lit(config.samples as f64)).sqrt(), config.samples)
        }
        Sampler::LowDiscrepancy { .. } => {
            let r = config.randomizations;
            if r < MIN_RANDOMIZATIONS {
                return Err(McError::TooFewRandomizations(r));
            }
            let batch = config.samples / r as u64;
            if batch == 0 {
                return Err(McError::TooFewSamples { samples: config.samples, randomizations: r });
            }
            let mut means = Vec::with_capacity(r);
            for j in 0..r {
                let values = payoff_values(config, &grid, config.sampler.randomization(j as u64), batch)?;
                means.push(mean_variance(&values).0);
            }
            let (mean, var) = mean_variance(&means);
            (mean, (var / T::from_count(r)).sqrt(), batch * r as u64)
        }
    };
    Ok(EstimatorRun {
        steps: config.steps,
        samples,
        estimate,
        standard_error,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn payoff_values<T: Real>(
    config: &EstimatorConfig<T>,
    grid: &TimeGrid<T>,
    sampler: Sampler,
    count: u64,
) -> Result<Vec<T>, McError> {
    let per_step = config.driver.uniforms_per_step();
    let width = per_step * config.steps;
    sampler.check_capacity(count, width)?;
    let n = config.field.dimension();
    let noise = config.driver.noise_dim();
    let results: Vec<Result<T, McError>> = (0..count)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; width], vec![T::zero(); noise], vec![T::zero(); n], vec![T::zero(); n], Vec::new()),
            |(u, y, x, inc, scratch), i| {
                sampler.point(i, u);
                x.copy_from_slice(&config.x0);
                for k in 0..config.steps {
                    config.driver.innovation(&u[k * per_step..(k + 1) * per_step], y);
                    config.field.increment_into(x, grid.dt(k), y, inc, scratch);
                    for d in 0..n {
                        x[d] = x[d] + inc[d];
                    }
                    if x.iter().any(|v| !v.is_finite()) {
                        return Err(McError::NonFiniteState { path: i, step: k + 1 });
                    }
                }
                let v = (config.payoff)(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(McError::NonFinitePayoff { path: i })
                }
            },
        )
        .collect();
    results.into_iter().collect()
}
