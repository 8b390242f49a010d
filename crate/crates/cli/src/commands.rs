//! The subcommands: each maps a resolved config to named output files.

use std::fmt::Write;
use std::time::Instant;

use discrete_ito::basis::{gram_schmidt_basis, walsh_completion, IncrementLaw, LawKind};
use discrete_ito::dif::{
    decompose_joint_scheme, decompose_scheme, decompose_weak_scheme, full_truncation, spanning_defect,
    ChaosDecomposition, CorrectionKey, StatePoint,
};
use discrete_ito::fdsolver::{backward_solve, LatticeOptions};
use discrete_ito::montecarlo::{
    complete_market_experiment, estimate, gbm_cubic_sum_reference, weak_order, EstimatorConfig, OrderFit, OrderOptions,
    OrderReference, Payoff,
};
use discrete_ito::scheme::{
    enumerate_paths, format_sig17, simulate_path_indexed, DriverKind, DriverSource, SchemeField, MAX_ENUMERATED_PATHS,
};

use crate::catalog;
use crate::config::{Command, RunConfig};
use crate::error::CliError;

/// Files produced by one run, plus what is echoed to stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub stdout: String,
    pub wall_time: f64,
}

pub fn run(config: &RunConfig) -> Result<Outputs, CliError> {
    let start = Instant::now();
    let files = match config.command {
        Command::Decompose => decompose(config)?,
        Command::Solve => solve(config)?,
        Command::Simulate => simulate(config)?,
        Command::Estimate => estimate_command(config)?,
        Command::Converge => converge(config)?,
        Command::CompleteMarket => complete_market(config)?,
    };
    let stdout = files.iter().find(|(name, _)| name == "summary.txt").map(|(_, s)| s.clone()).unwrap_or_default();
    Ok(Outputs { files, stdout, wall_time: start.elapsed().as_secs_f64() })
}

struct Problem {
    field: SchemeField<f64>,
    driver: DriverKind<f64>,
    x0: Vec<f64>,
    horizon: f64,
}

fn problem(config: &RunConfig) -> Result<Problem, CliError> {
    let dimension = config.usize("dimension")?;
    let field = catalog::field(config.get("field"), dimension, config.f64("sigma"), config.f64("mu"))?;
    let driver = catalog::driver(config.get("driver"), dimension)?;
    let mut x0 = config.f64_list("x0");
    if x0.len() == 1 {
        x0 = vec![x0[0]; dimension];
    } else if x0.len() != dimension {
        return Err(CliError::config("x0", format!("{} values for dimension {dimension}", x0.len())));
    }
    Ok(Problem { field, driver, x0, horizon: config.f64("horizon") })
}

fn payoff(config: &RunConfig) -> Result<Payoff<f64>, CliError> {
    catalog::payoff(config.get("payoff"), config.f64("strike"), config.f64("width"))
}

fn lattice_options(config: &RunConfig) -> Result<LatticeOptions, CliError> {
    Ok(LatticeOptions { key_digits: config.usize("key_digits")? as u32, node_budget: config.usize("node_budget")? })
}

fn order_options(config: &RunConfig) -> Result<OrderOptions, CliError> {
    Ok(OrderOptions {
        noise_fraction: config.f64("noise_fraction"),
        max_samples: config.u64("max_samples"),
        prefer_exact: config.bool("exact"),
        lattice: lattice_options(config)?,
        confidence: config.f64("confidence"),
    })
}

fn line(out: &mut String, key: &str, value: f64) {
    // Adding +0.0 turns -0.0 into 0.0.
    let _ = writeln!(out, "{key}={}", format_sig17(value + 0.0));
}

fn decompose(config: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let p = problem(config)?;
    let g = payoff(config)?;
    let f = |_t: f64, x: &[f64]| g(x);
    let dt = p.horizon / config.usize("steps")? as f64;
    let state = StatePoint::origin(p.x0.clone());
    let d = match &p.driver {
        DriverKind::Product(laws) => {
            let bases = laws
                .iter()
                .map(|law| {
                    let count = match law.kind() {
                        LawKind::FiniteSupport => law.support_size().expect("finite law"),
                        _ => config.usize("hermite_degree")? + 1,
                    };
                    gram_schmidt_basis(law, count).map_err(|e| CliError::Numerical(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let truncation = match config.usize("truncation")? {
                0 => full_truncation(&bases),
                t => t,
            };
            decompose_scheme(f, &state, &p.field, laws, &bases, truncation, dt)?
        }
        DriverKind::Joint(law) => decompose_joint_scheme(f, &state, &p.field, law, dt)?,
        DriverKind::Walsh(drivers) => {
            let corrections = walsh_completion(drivers);
            decompose_weak_scheme(f, &state, &p.field, &IncrementLaw::lebesgue_unit(), drivers, &corrections, dt)?
        }
    };
    let mut csv = String::from("term,index,coefficient\n");
    for (j, c) in d.martingale_coeffs.iter().enumerate() {
        let _ = writeln!(csv, "martingale,{},{}", j + 1, format_sig17(*c));
    }
    let _ = writeln!(csv, "drift,0,{}", format_sig17(d.drift_coeff));
    for (key, c) in &d.corrections {
        let _ = writeln!(csv, "correction,{},{}", correction_label(key), format_sig17(*c));
    }
    Ok(vec![("decomposition.csv".into(), csv), ("summary.txt".into(), decomposition_summary(&d))])
}

fn correction_label(key: &CorrectionKey) -> String {
    let join = |v: Vec<String>| v.join(" ");
    match key {
        CorrectionKey::Tensor(l) => format!("tensor {}", join(l.iter().map(usize::to_string).collect())),
        CorrectionKey::Walsh(w) => format!("walsh {}", join(w.factors().iter().map(u32::to_string).collect())),
        CorrectionKey::Completion(i) => format!("completion {i}"),
    }
}

fn decomposition_summary(d: &ChaosDecomposition<f64>) -> String {
    let mut out = String::new();
    line(&mut out, "current_value", d.current_value);
    line(&mut out, "dt", d.dt);
    for (j, c) in d.martingale_coeffs.iter().enumerate() {
        line(&mut out, &format!("martingale_{}", j + 1), *c);
    }
    line(&mut out, "drift_coeff", d.drift_coeff);
    line(&mut out, "drift_part", d.drift_part());
    let _ = writeln!(out, "corrections={}", d.corrections.len());
    line(&mut out, "spanning_defect", spanning_defect(d));
    out
}

fn solve(config: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let p = problem(config)?;
    if p.driver.outcome_count().is_none() {
        return Err(CliError::config("driver", "the lattice solver needs an enumerable driver"));
    }
    let g = payoff(config)?;
    let steps = config.usize("steps")?;
    let sol = backward_solve(&p.field, &p.driver, |x| g(x), &p.x0, steps, p.horizon, lattice_options(config)?)?;
    let mut out = String::new();
    line(&mut out, "root_value", sol.root_value());
    let _ = writeln!(out, "nodes={}", sol.lattice().node_count());
    let _ = writeln!(out, "steps={steps}");
    line(&mut out, "residual", sol.residual());
    let paths = p.driver.outcome_count().and_then(|c| c.checked_pow(steps as u32));
    if paths.is_some_and(|n| n <= MAX_ENUMERATED_PATHS) {
        let tree = enumerate_paths(&p.field, &p.driver, &p.x0, steps, p.horizon)?;
        let oracle: f64 = tree.iter().map(|(path, w)| w * g(path.terminal())).sum();
        line(&mut out, "enumeration", oracle);
        line(&mut out, "enumeration_gap", (oracle - sol.root_value()).abs());
    }
    Ok(vec![("lattice.csv".into(), sol.to_csv()), ("summary.txt".into(), out)])
}

fn simulate(config: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let p = problem(config)?;
    let steps = config.usize("steps")?;
    let paths = config.u64("paths");
    let source = DriverSource::new(p.driver.clone(), catalog::sampler(config.get("sampler"), config.u64("seed"))?);
    let mut csv = String::from("path,t");
    for i in 1..=p.x0.len() {
        let _ = write!(csv, ",x{i}");
    }
    csv.push('\n');
    let mut replay = 0.0f64;
    for index in 0..paths {
        let path = simulate_path_indexed(&p.field, &source, &p.x0, steps, p.horizon, index)?;
        replay = replay.max(path.replay_error(&p.field));
        for s in &path.states {
            let _ = write!(csv, "{index},{}", format_sig17(s.time));
            for v in &s.state {
                let _ = write!(csv, ",{}", format_sig17(*v));
            }
            csv.push('\n');
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "paths={paths}");
    let _ = writeln!(out, "steps={steps}");
    line(&mut out, "max_replay_error", replay);
    Ok(vec![("paths.csv".into(), csv), ("summary.txt".into(), out)])
}

fn estimator(config: &RunConfig, steps: usize) -> Result<EstimatorConfig<f64>, CliError> {
    let p = problem(config)?;
    Ok(EstimatorConfig {
        field: p.field,
        driver: p.driver,
        x0: p.x0,
        steps,
        horizon: p.horizon,
        payoff: payoff(config)?,
        samples: config.u64("samples"),
        sampler: catalog::sampler(config.get("sampler"), config.u64("seed"))?,
        randomizations: config.usize("randomizations")?,
    })
}

fn estimate_command(config: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let run = estimate(&estimator(config, config.usize("steps")?)?)?;
    let csv = format!(
        "N,M,estimate,stderr\n{},{},{},{}\n",
        run.steps,
        run.samples,
        format_sig17(run.estimate),
        format_sig17(run.standard_error)
    );
    let mut out = String::new();
    line(&mut out, "estimate", run.estimate);
    line(&mut out, "standard_error", run.standard_error);
    let _ = writeln!(out, "samples={}", run.samples);
    let _ = writeln!(out, "steps={}", run.steps);
    Ok(vec![("estimate.csv".into(), csv), ("summary.txt".into(), out)])
}

fn grid(config: &RunConfig) -> Result<Vec<usize>, CliError> {
    let grid = config.usize_list("grid");
    if grid.is_empty() || grid[0] == 0 {
        return Err(CliError::config("grid", "step counts must be positive"));
    }
    Ok(grid)
}

fn converge(config: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let grid = grid(config)?;
    let base = estimator(config, grid[0])?;
    let reference = match config.get("reference") {
        "fine" => OrderReference::FineGrid(config.usize("reference_steps")?),
        "gbm-cubic-sum" => {
            if config.get("field") != "em-gbm" || config.get("payoff") != "cubic-sum" || base.x0.len() != 2 {
                return Err(CliError::config(
                    "reference",
                    "gbm-cubic-sum needs field=em-gbm, payoff=cubic-sum, dimension=2",
                ));
            }
            let x0 = [base.x0[0], base.x0[1]];
            OrderReference::Analytic(gbm_cubic_sum_reference(x0, config.f64("sigma"), config.f64("mu"), base.horizon))
        }
        v => OrderReference::Analytic(v.parse().expect("validated on set")),
    };
    let fit = weak_order(&base, &grid, reference, order_options(config)?)?;
    Ok(order_files(&fit, String::new()))
}

fn order_files(fit: &OrderFit, mut summary: String) -> Vec<(String, String)> {
    summary.push_str(&fit.summary());
    vec![("order.csv".into(), fit.to_csv()), ("summary.txt".into(), summary)]
}

fn complete_market(config: &RunConfig) -> Result<Vec<(String, String)>, CliError> {
    let report = complete_market_experiment(
        &grid(config)?,
        config.usize("search_resolution")?,
        config.u64("seed"),
        order_options(config)?,
    )?;
    let mut out = String::new();
    for (name, values) in [("design_mean", &report.design.mean), ("design_covariance", &report.design.covariance)] {
        for (i, v) in values.iter().enumerate() {
            line(&mut out, &format!("{name}_{i}"), *v);
        }
    }
    line(&mut out, "design_third_mismatch", report.design.third_mismatch);
    line(&mut out, "search_min_mismatch", report.search.min_mismatch);
    let _ = writeln!(out, "search_designs_checked={}", report.search.designs_checked);
    Ok(order_files(&report.fit, out))
}
