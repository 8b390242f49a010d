use std::fmt::Write as _;
use std::time::Instant;

use crate::fdsolver::{backward_solve, FdError, LatticeOptions};
use crate::scalar::Real;
use crate::scheme::format_sig17;
use crate::stats::fit_loglog;

use super::{estimate, EstimatorConfig, McError};

/// Fewest step counts a slope is fitted over.
pub const MIN_GRID_POINTS: usize = 4;

/// What the scheme's expectation converges to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderReference {
    /// A known limit value.
    Analytic(f64),
    /// The same scheme with this many steps.
    FineGrid(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderOptions {
    /// Monte Carlo noise must stay below this fraction of the smallest
    /// discretization error.
    pub noise_fraction: f64,
    /// Largest sample count the escalation may reach.
    pub max_samples: u64,
    /// Use exact lattice expectations whenever the driver is enumerable and
    /// the lattice fits the node budget.
    pub prefer_exact: bool,
    pub lattice: LatticeOptions,
    /// Confidence level of the slope interval.
    pub confidence: f64,
}

impl Default for OrderOptions {
    fn default() -> Self {
        OrderOptions {
            noise_fraction: 0.2,
            max_samples: 1 << 22,
            prefer_exact: true,
            lattice: LatticeOptions::default(),
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderPoint {
    pub steps: usize,
    pub dt: f64,
    pub estimate: f64,
    /// 0 for exact lattice values.
    pub stderr: f64,
    /// `|estimate - reference|`.
    pub error: f64,
    /// 0 for exact lattice values.
    pub samples: u64,
    pub exact: bool,
}

/// Least-squares fit of `log error` against `log Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub points: Vec<OrderPoint>,
    pub reference: f64,
    pub reference_stderr: f64,
    pub slope: f64,
    /// Half-width of the slope confidence interval.
    pub half_width: f64,
    pub intercept: f64,
    /// RMS residual of the linear fit in log space.
    pub residual: f64,
    /// Seconds; kept out of [`OrderFit::summary`].
    pub wall_time: f64,
}

impl OrderFit {
    pub fn slope_interval(&self) -> (f64, f64) {
        (self.slope - self.half_width, self.slope + self.half_width)
    }

    /// `N,dt,estimate,stderr,error,logdt,logerror` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,dt,estimate,stderr,error,logdt,logerror\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.steps,
                format_sig17(p.dt),
                format_sig17(p.estimate),
                format_sig17(p.stderr),
                format_sig17(p.error),
                format_sig17(p.dt.ln()),
                format_sig17(p.error.ln()),
            );
        }
        out
    }

    /// Flat `key=value` lines.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "slope={}", format_sig17(self.slope));
        let _ = writeln!(out, "half_width={}", format_sig17(self.half_width));
        let _ = writeln!(out, "slope_low={}", format_sig17(self.slope - self.half_width));
        let _ = writeln!(out, "slope_high={}", format_sig17(self.slope + self.half_width));
        let _ = writeln!(out, "intercept={}", format_sig17(self.intercept));
        let _ = writeln!(out, "residual={}", format_sig17(self.residual));
        let _ = writeln!(out, "reference={}", format_sig17(self.reference));
        let _ = writeln!(out, "reference_stderr={}", format_sig17(self.reference_stderr));
        let _ = writeln!(out, "points={}", self.points.len());
        let _ = writeln!(out, "exact_points={}", self.points.iter().filter(|p| p.exact).count());
        out
    }
}

struct Value {
    estimate: f64,
    stderr: f64,
    samples: u64,
    exact: bool,
}

fn scheme_value<T: Real>(
    base: &EstimatorConfig<T>,
    steps: usize,
    samples: u64,
    options: &OrderOptions,
) -> Result<Value, McError> {
    if options.prefer_exact && base.driver.outcome_count().is_some() {
        let payoff = base.payoff.clone();
        match backward_solve(
            &base.field,
            &base.driver,
            move |x| payoff(x),
            &base.x0,
            steps,
            base.horizon,
            options.lattice,
        ) {
            Ok(sol) => {
                return Ok(Value { estimate: sol.root_value().as_f64(), stderr: 0.0, samples: 0, exact: true });
            }
            Err(FdError::NodeBudgetExceeded { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let config = EstimatorConfig { steps, samples, ..base.clone() };
    let run = estimate(&config)?;
    Ok(Value {
        estimate: run.estimate.as_f64(),
        stderr: run.standard_error.as_f64(),
        samples: run.samples,
        exact: false,
    })
}

/// Weak-order study: `|E f(X^N_T) - reference|` for each `N` of `grid`,
/// with a log-log slope fit.
///
/// Exact lattice values are used when possible. Otherwise Monte Carlo
/// sample counts are multiplied by 4 until every point's noise (its own
/// standard error plus the reference's) is below
/// `noise_fraction × smallest error`, failing with
/// [`McError::NoiseDominated`] past `max_samples`.
pub fn weak_order<T: Real>(
    base: &EstimatorConfig<T>,
    grid: &[usize],
    reference: OrderReference,
    options: OrderOptions,
) -> Result<OrderFit, McError> {
    let start = Instant::now();
    if grid.len() < MIN_GRID_POINTS || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(McError::InvalidGrid(grid.to_vec()));
    }
    let mut reference_value = match reference {
        OrderReference::Analytic(v) => Value { estimate: v, stderr: 0.0, samples: 0, exact: true },
        OrderReference::FineGrid(n) => scheme_value(base, n, base.samples, &options)?,
    };
    let mut values: Vec<Value> =
        grid.iter().map(|&n| scheme_value(base, n, base.samples, &options)).collect::<Result<_, _>>()?;

    loop {
        let min_error =
            values.iter().map(|v| (v.estimate - reference_value.estimate).abs()).fold(f64::INFINITY, f64::min);
        let budget = options.noise_fraction * min_error;
        if !reference_value.exact && reference_value.stderr >= budget {
            let samples = reference_value.samples * 4;
            if samples > options.max_samples {
                let steps = match reference {
                    OrderReference::FineGrid(n) => n,
                    OrderReference::Analytic(_) => 0,
                };
                return Err(McError::NoiseDominated { steps, noise: reference_value.stderr, budget });
            }
            if let OrderReference::FineGrid(n) = reference {
                reference_value = scheme_value(base, n, samples, &options)?;
            }
            continue;
        }
        let noisy: Vec<usize> = (0..values.len())
            .filter(|&i| !values[i].exact && values[i].stderr + reference_value.stderr >= budget)
            .collect();
        if noisy.is_empty() {
            break;
        }
        for i in noisy {
            let samples = values[i].samples * 4;
            if samples > options.max_samples {
                return Err(McError::NoiseDominated {
                    steps: grid[i],
                    noise: values[i].stderr + reference_value.stderr,
                    budget,
                });
            }
            values[i] = scheme_value(base, grid[i], samples, &options)?;
        }
    }

    let horizon = base.horizon.as_f64();
    let points: Vec<OrderPoint> = grid
        .iter()
        .zip(&values)
        .map(|(&n, v)| OrderPoint {
            steps: n,
            dt: horizon / n as f64,
            estimate: v.estimate,
            stderr: v.stderr,
            error: (v.estimate - reference_value.estimate).abs(),
            samples: v.samples,
            exact: v.exact,
        })
        .collect();
    let max_error = points.iter().map(|p| p.error).fold(0.0, f64::max);
    let floor = 1e3 * T::epsilon().as_f64() * reference_value.estimate.abs().max(1.0);
    if max_error <= floor || points.iter().any(|p| p.error == 0.0) {
        return Err(McError::DegenerateFit { max_error });
    }
    let dts: Vec<f64> = points.iter().map(|p| p.dt).collect();
    let errors: Vec<f64> = points.iter().map(|p| p.error).collect();
    let fit = fit_loglog(&dts, &errors).ok_or(McError::DegenerateFit { max_error })?;
    Ok(OrderFit {
        points,
        reference: reference_value.estimate,
        reference_stderr: reference_value.stderr,
        slope: fit.slope,
        half_width: fit.slope_half_width(options.confidence),
        intercept: fit.intercept,
        residual: fit.residual,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
