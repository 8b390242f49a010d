//! Built-in drivers, fields, payoffs and samplers, addressed by stable ids.

use std::fmt::Write;
use std::sync::Arc;

use discrete_ito::basis::{walsh_driver_vector, IncrementLaw};
use discrete_ito::montecarlo::{gbm_field, mean_square, smooth_call, Payoff};
use discrete_ito::scheme::{DriverKind, JointLaw, QmcKind, Sampler, SchemeField};

use crate::error::CliError;

pub const DRIVERS: &[(&str, &str)] = &[
    ("bernoulli", "independent symmetric ±1 coordinates"),
    ("trinomial", "independent coordinates uniform on {-√1.5, 0, √1.5}"),
    ("trinomial-3pt-120deg", "three atoms at 120° in R^2, mean 0, covariance I (needs dimension=2)"),
    ("walsh-n", "first n odd-cardinality Walsh functions of one uniform per step"),
    ("gaussian", "independent standard normal coordinates (not enumerable)"),
];

pub const FIELDS: &[(&str, &str)] = &[
    ("em-gbm", "Euler-Maruyama, σ_i(x) = sigma·x_i, μ_i(x) = mu·x_i"),
    ("em-identity", "Euler-Maruyama, σ = sigma·I, μ_i = mu"),
    ("walk", "X_{k+1} = X_k + y_k, ignores sigma and mu"),
];

pub const PAYOFFS: &[(&str, &str)] = &[
    ("quad", "Σ x_i²"),
    ("smooth-call", "width·ln(1 + exp((x_1 - strike)/width))"),
    ("mean-square-100d", "(1/n) Σ x_i², named for its n = 100 use"),
    ("cubic-sum", "(Σ x_i)³"),
    ("linear", "Σ x_i"),
];

pub const SAMPLERS: &[(&str, &str)] = &[
    ("pseudo", "ChaCha8 stream per path"),
    ("sobol", "Owen-scrambled Sobol, randomized"),
    ("halton", "Halton with a random shift, randomized"),
];

pub const REFERENCES: &[(&str, &str)] = &[
    ("fine", "scheme value at reference_steps"),
    ("gbm-cubic-sum", "closed-form E[(X_1 + X_2)³] for em-gbm with dimension=2"),
];

pub fn ids(table: &[(&'static str, &str)]) -> Vec<&'static str> {
    table.iter().map(|(id, _)| *id).collect()
}

/// Text listing of every catalog.
pub fn listing() -> String {
    let mut out = String::new();
    for (title, table) in [
        ("drivers", DRIVERS),
        ("fields", FIELDS),
        ("payoffs", PAYOFFS),
        ("samplers", SAMPLERS),
        ("references", REFERENCES),
    ] {
        let _ = writeln!(out, "{title}:");
        for (id, about) in table {
            let _ = writeln!(out, "  {id:<24}{about}");
        }
    }
    out
}

pub fn driver(id: &str, dimension: usize) -> Result<DriverKind<f64>, CliError> {
    Ok(match id {
        "bernoulli" => DriverKind::Product(vec![IncrementLaw::symmetric_bernoulli(); dimension]),
        "trinomial" => DriverKind::Product(vec![IncrementLaw::unit_trinomial(); dimension]),
        "trinomial-3pt-120deg" => {
            if dimension != 2 {
                return Err(CliError::config("dimension", format!("driver {id} needs dimension=2, got {dimension}")));
            }
            DriverKind::Joint(JointLaw::triangle())
        }
        "walsh-n" => DriverKind::Walsh(walsh_driver_vector(dimension)),
        "gaussian" => DriverKind::gaussian(dimension),
        _ => return Err(unknown("driver", id)),
    })
}

pub fn field(id: &str, dimension: usize, sigma: f64, mu: f64) -> Result<SchemeField<f64>, CliError> {
    Ok(match id {
        "em-gbm" => gbm_field(dimension, sigma, mu),
        "em-identity" => SchemeField::constant(dimension, sigma, mu),
        "walk" => SchemeField::walk(dimension),
        _ => return Err(unknown("field", id)),
    })
}

pub fn payoff(id: &str, strike: f64, width: f64) -> Result<Payoff<f64>, CliError> {
    Ok(match id {
        "quad" => Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum()),
        "smooth-call" => {
            if !(width > 0.0) {
                return Err(CliError::config("width", "must be positive"));
            }
            smooth_call(strike, width)
        }
        "mean-square-100d" => mean_square(),
        "cubic-sum" => Arc::new(|x: &[f64]| x.iter().sum::<f64>().powi(3)),
        "linear" => Arc::new(|x: &[f64]| x.iter().sum()),
        _ => return Err(unknown("payoff", id)),
    })
}

pub fn sampler(id: &str, seed: u64) -> Result<Sampler, CliError> {
    Ok(match id {
        "pseudo" => Sampler::PseudoRandom { seed },
        "sobol" => Sampler::LowDiscrepancy { seed, kind: QmcKind::Sobol },
        "halton" => Sampler::LowDiscrepancy { seed, kind: QmcKind::Halton },
        _ => return Err(unknown("sampler", id)),
    })
}

fn unknown(key: &str, id: &str) -> CliError {
    CliError::config(key, format!("unknown id `{id}` (see `dito catalog`)"))
}
