use std::sync::Arc;

use crate::basis::{walsh_driver_vector, IncrementLaw};
use crate::fdsolver::{backward_solve, LatticeOptions};
use crate::scheme::{DriverKind, JointLaw, Sampler, SchemeField};

use super::order::{weak_order, OrderFit, OrderOptions, OrderReference};
use super::{estimate, EstimatorConfig, EstimatorRun, McError, Payoff, MIN_RANDOMIZATIONS};

/// Step counts of the one-dimensional moment-matched rate study.
pub const MOMENT_MATCHED_GRID: [usize; 4] = [16, 32, 64, 128];
/// Its fine-grid reference, 32 times the largest grid entry.
pub const MOMENT_MATCHED_REFERENCE_STEPS: usize = 4096;
/// Step counts of the complete-market rate study.
pub const COMPLETE_MARKET_GRID: [usize; 4] = [16, 32, 64, 128];

const GBM_SIGMA: f64 = 0.2;
const GBM_MU: f64 = 0.05;
/// Drift of the complete-market study: prices under a zero interest rate.
const MARKET_MU: f64 = 0.0;
const CALL_STRIKE: f64 = 1.0;
const CALL_WIDTH: f64 = 0.2;

/// `w·ln(1 + e^{(x-K)/w})`, a smooth `max(x - K, 0)`.
pub fn smooth_call(strike: f64, width: f64) -> Payoff<f64> {
    Arc::new(move |x: &[f64]| {
        let z = (x[0] - strike) / width;
        width * (z.max(0.0) + (-z.abs()).exp().ln_1p())
    })
}

/// `(1/n) Σ x_j²`.
pub fn mean_square() -> Payoff<f64> {
    Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

/// Euler–Maruyama for independent geometric Brownian motions,
/// `σ_i(x) = sigma·x_i`, `μ_i(x) = mu·x_i`.
pub fn gbm_field(dimension: usize, sigma: f64, mu: f64) -> SchemeField<f64> {
    SchemeField::euler_maruyama_diagonal(
        dimension,
        move |x: &[f64], s: &mut [f64]| {
            for (si, xi) in s.iter_mut().zip(x) {
                *si = sigma * xi;
            }
        },
        move |x: &[f64], m: &mut [f64]| {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi = mu * xi;
            }
        },
    )
}

/// `dX = 0.05 X dt + 0.2 X dW` from 1 with a Bernoulli driver and a smooth
/// call payoff; the Bernoulli law matches the Gaussian moments up to order
/// three, so the rate is 1.
pub fn moment_matched_experiment(grid: &[usize], seed: u64, options: OrderOptions) -> Result<OrderFit, McError> {
    let base = EstimatorConfig {
        field: gbm_field(1, GBM_SIGMA, GBM_MU),
        driver: DriverKind::Product(vec![IncrementLaw::symmetric_bernoulli()]),
        x0: vec![1.0],
        steps: grid[0],
        horizon: 1.0,
        payoff: smooth_call(CALL_STRIKE, CALL_WIDTH),
        samples: 1 << 14,
        sampler: Sampler::PseudoRandom { seed },
        randomizations: MIN_RANDOMIZATIONS,
    };
    weak_order(&base, grid, OrderReference::FineGrid(MOMENT_MATCHED_REFERENCE_STEPS), options)
}

/// `E[(X_1 + X_2)^3]` at `T` for independent geometric Brownian motions
/// `dX_i = mu X_i dt + sigma X_i dW_i` from `x0`.
pub fn gbm_cubic_sum_reference(x0: [f64; 2], sigma: f64, mu: f64, horizon: f64) -> f64 {
    let moment = |x: f64, a: i32| {
        let a_f = f64::from(a);
        x.powi(a) * (a_f * mu * horizon + 0.5 * a_f * (a_f - 1.0) * sigma * sigma * horizon).exp()
    };
    let binom = [1.0, 3.0, 3.0, 1.0];
    (0..=3).map(|a| binom[a as usize] * moment(x0[0], a) * moment(x0[1], 3 - a)).sum()
}

/// Mean, covariance and third moments of a finite design in `R^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMoments {
    pub mean: Vec<f64>,
    /// Row-major `2×2`.
    pub covariance: Vec<f64>,
    /// `E[y_i y_j y_k]` at index `(i·2 + j)·2 + k`.
    pub third: Vec<f64>,
    /// Max-norm distance of `third` from the Gaussian's (zero) tensor.
    pub third_mismatch: f64,
}

impl DesignMoments {
    pub fn of(law: &JointLaw<f64>) -> Self {
        let third = law.third_moments();
        let third_mismatch = third.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        DesignMoments { mean: law.mean(), covariance: law.second_moments(), third, third_mismatch }
    }
}

/// Smallest third-moment mismatch found over three-atom laws in `R^2` with
/// mean 0 and identity covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionSearch {
    pub min_mismatch: f64,
    pub weights: [f64; 3],
    pub angle: f64,
    pub reflected: bool,
    pub designs_checked: usize,
}

/// Every three-atom law with mean 0 and covariance `I` in `R^2` has atoms
/// `a_i = c_i / √p_i` where the columns `c` are an orthonormal basis of the
/// plane orthogonal to `(√p_1, √p_2, √p_3)`; the family is therefore the
/// weights, a rotation angle and a reflection. The search scans a grid of
/// `resolution` steps per weight coordinate and angle.
pub fn three_atom_obstruction_search(resolution: usize) -> ObstructionSearch {
    let mut best = ObstructionSearch {
        min_mismatch: f64::INFINITY,
        weights: [0.0; 3],
        angle: 0.0,
        reflected: false,
        designs_checked: 0,
    };
    let r = resolution.max(3);
    for i in 1..r {
        for j in 1..r - i {
            let p = [i as f64 / r as f64, j as f64 / r as f64, (r - i - j) as f64 / r as f64];
            let (e1, e2) = plane_basis(p);
            for a in 0..r {
                let angle = std::f64::consts::TAU * a as f64 / r as f64;
                for reflected in [false, true] {
                    let s = if reflected { -1.0 } else { 1.0 };
                    let (c, sn) = (angle.cos(), angle.sin());
                    let atoms: Vec<Vec<f64>> = (0..3)
                        .map(|k| {
                            let c1 = c * e1[k] + sn * s * e2[k];
                            let c2 = -sn * e1[k] + c * s * e2[k];
                            vec![c1 / p[k].sqrt(), c2 / p[k].sqrt()]
                        })
                        .collect();
                    let law = JointLaw::new(atoms, p.to_vec()).expect("valid three-atom design");
                    let mismatch = DesignMoments::of(&law).third_mismatch;
                    best.designs_checked += 1;
                    if mismatch < best.min_mismatch {
                        best = ObstructionSearch { min_mismatch: mismatch, weights: p, angle, reflected, ..best };
                    }
                }
            }
        }
    }
    best
}

// Orthonormal basis of the plane orthogonal to (√p_1, √p_2, √p_3).
fn plane_basis(p: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let u = [p[0].sqrt(), p[1].sqrt(), p[2].sqrt()];
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut out = Vec::new();
    for e in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        let mut v = e;
        for _ in 0..2 {
            for b in std::iter::once(&u).chain(out.iter()) {
                let c = dot(&v, b);
                for k in 0..3 {
                    v[k] -= c * b[k];
                }
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            out.push([v[0] / n, v[1] / n, v[2] / n]);
        }
        if out.len() == 2 {
            break;
        }
    }
    (out[0], out[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteMarketReport {
    pub design: DesignMoments,
    pub search: ObstructionSearch,
    pub fit: OrderFit,
}

/// Two assets `dX_i = 0.2 X_i dW_i` from `(1, 1)` driven by
/// the three-atom design (`#G = n + 1`), payoff `(x_1 + x_2)^3`, compared
/// with the continuous-time expectation.
pub fn complete_market_experiment(
    grid: &[usize],
    search_resolution: usize,
    seed: u64,
    options: OrderOptions,
) -> Result<CompleteMarketReport, McError> {
    let law = JointLaw::triangle();
    let design = DesignMoments::of(&law);
    let search = three_atom_obstruction_search(search_resolution);
    let base = EstimatorConfig {
        field: gbm_field(2, GBM_SIGMA, MARKET_MU),
        driver: DriverKind::Joint(law),
        x0: vec![1.0, 1.0],
        steps: grid[0],
        horizon: 1.0,
        payoff: Arc::new(|x: &[f64]| (x[0] + x[1]).powi(3)),
        samples: 1 << 14,
        sampler: Sampler::PseudoRandom { seed },
        randomizations: MIN_RANDOMIZATIONS,
    };
    let reference = gbm_cubic_sum_reference([1.0, 1.0], GBM_SIGMA, MARKET_MU, 1.0);
    let fit = weak_order(&base, grid, OrderReference::Analytic(reference), options)?;
    Ok(CompleteMarketReport { design, search, fit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighDimensionReport {
    pub dimension: usize,
    pub run: EstimatorRun<f64>,
    /// Scheme expectation from per-coordinate lattices.
    pub exact: f64,
    /// `|estimate - exact| / standard_error`.
    pub z_score: f64,
}

/// `n` coordinates `X^j_{k+1} = X^j_k + H_j(ξ_k)√Δt` driven by the first `n`
/// Walsh drivers of one uniform per step, from 0 on `[0, 1]`, payoff
/// `(1/n) Σ x_j²`.
///
/// The coordinates are uncorrelated but not independent, and the payoff is a
/// sum of one-coordinate terms, so the exact value is the average of the
/// coordinates' expectations; each comes from a lattice for that
/// coordinate's marginal law.
pub fn high_dimension_smoke(
    dimension: usize,
    steps: usize,
    samples: u64,
    sampler: Sampler,
) -> Result<HighDimensionReport, McError> {
    let drivers = walsh_driver_vector(dimension);
    let kind = DriverKind::Walsh(drivers.clone());
    let config = EstimatorConfig {
        field: SchemeField::constant(dimension, 1.0, 0.0),
        driver: kind,
        x0: vec![0.0; dimension],
        steps,
        horizon: 1.0,
        payoff: mean_square(),
        samples,
        sampler,
        randomizations: MIN_RANDOMIZATIONS,
    };
    let run = estimate(&config)?;

    let one = SchemeField::constant(1, 1.0, 0.0);
    let mut total = 0.0;
    for w in drivers {
        let outcomes = DriverKind::<f64>::Walsh(vec![w]).outcomes()?;
        let points: Vec<f64> = vec![-1.0, 1.0];
        let weights: Vec<f64> = points
            .iter()
            .map(|&v| outcomes.iter().filter(|o| o.innovation[0] == v).map(|o| o.probability).sum())
            .collect();
        let marginal = IncrementLaw::finite(&points, &weights).map_err(crate::scheme::SchemeError::from)?;
        let sol = backward_solve(
            &one,
            &DriverKind::Product(vec![marginal]),
            |x| x[0] * x[0],
            &[0.0],
            steps,
            1.0,
            LatticeOptions::default(),
        )?;
        total += sol.root_value();
    }
    let exact = total / dimension as f64;
    let z_score = (run.estimate - exact).abs() / run.standard_error;
    Ok(HighDimensionReport { dimension, run, exact, z_score })
}
