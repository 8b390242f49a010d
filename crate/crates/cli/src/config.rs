//! Flat `key=value` run configurations and the key table they are checked
//! against.

use std::fmt::Write;

use crate::catalog;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Decompose,
    Solve,
    Simulate,
    Estimate,
    Converge,
    CompleteMarket,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Decompose,
        Command::Solve,
        Command::Simulate,
        Command::Estimate,
        Command::Converge,
        Command::CompleteMarket,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Converge => "converge",
            Command::CompleteMarket => "complete-market",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueKind {
    /// Unsigned integer no smaller than the bound.
    Count(u64),
    Real,
    Positive,
    /// Strictly inside `(0, 1)`.
    Fraction,
    Bool,
    Reals,
    Counts,
    Choice(&'static [(&'static str, &'static str)]),
    /// A reference id or a number.
    Reference,
}

impl ValueKind {
    fn check(self, value: &str) -> Result<(), String> {
        let real = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite());
        let ok = match self {
            ValueKind::Count(min) => value.parse::<u64>().is_ok_and(|v| v >= min),
            ValueKind::Real => real(value).is_some(),
            ValueKind::Positive => real(value).is_some_and(|v| v > 0.0),
            ValueKind::Fraction => real(value).is_some_and(|v| v > 0.0 && v < 1.0),
            ValueKind::Bool => matches!(value, "true" | "false"),
            ValueKind::Reals => value.split(',').all(|v| real(v.trim()).is_some()),
            ValueKind::Counts => value.split(',').all(|v| v.trim().parse::<usize>().is_ok()),
            ValueKind::Choice(table) => table.iter().any(|(id, _)| *id == value),
            ValueKind::Reference => catalog::REFERENCES.iter().any(|(id, _)| *id == value) || real(value).is_some(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("invalid value `{value}`, expected {}", self.describe()))
        }
    }

    pub fn describe(self) -> String {
        match self {
            ValueKind::Count(0) => "a non-negative integer".into(),
            ValueKind::Count(m) => format!("an integer >= {m}"),
            ValueKind::Real => "a number".into(),
            ValueKind::Positive => "a positive number".into(),
            ValueKind::Fraction => "a number in (0, 1)".into(),
            ValueKind::Bool => "true or false".into(),
            ValueKind::Reals => "comma-separated numbers".into(),
            ValueKind::Counts => "comma-separated integers".into(),
            ValueKind::Choice(table) => format!("one of {}", catalog::ids(table).join(", ")),
            ValueKind::Reference => format!("{} or a number", catalog::ids(catalog::REFERENCES).join(", ")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub kind: ValueKind,
    pub commands: &'static [Command],
    pub help: &'static str,
}

use Command::{CompleteMarket as M, Converge as C, Decompose as D, Estimate as E, Simulate as Si, Solve as S};

const SCHEME: &[Command] = &[D, S, Si, E, C];
const PAYOFF: &[Command] = &[D, S, E, C];
const ORDER: &[Command] = &[C, M];
const LATTICE: &[Command] = &[S, C, M];

/// Every accepted key, in audit-file order.
pub const KEYS: &[KeySpec] = &[
    KeySpec { name: "dimension", default: "1", kind: ValueKind::Count(1), commands: SCHEME, help: "state dimension n" },
    KeySpec {
        name: "driver",
        default: "bernoulli",
        kind: ValueKind::Choice(catalog::DRIVERS),
        commands: SCHEME,
        help: "innovation law id",
    },
    KeySpec {
        name: "field",
        default: "em-identity",
        kind: ValueKind::Choice(catalog::FIELDS),
        commands: SCHEME,
        help: "update map id",
    },
    KeySpec {
        name: "sigma",
        default: "1",
        kind: ValueKind::Real,
        commands: SCHEME,
        help: "volatility parameter of the field",
    },
    KeySpec { name: "mu", default: "0", kind: ValueKind::Real, commands: SCHEME, help: "drift parameter of the field" },
    KeySpec {
        name: "payoff",
        default: "quad",
        kind: ValueKind::Choice(catalog::PAYOFFS),
        commands: PAYOFF,
        help: "terminal function id",
    },
    KeySpec { name: "strike", default: "1", kind: ValueKind::Real, commands: PAYOFF, help: "strike of smooth-call" },
    KeySpec {
        name: "width",
        default: "0.2",
        kind: ValueKind::Positive,
        commands: PAYOFF,
        help: "smoothing width of smooth-call",
    },
    KeySpec {
        name: "x0",
        default: "0",
        kind: ValueKind::Reals,
        commands: SCHEME,
        help: "initial state, one value is used for every coordinate",
    },
    KeySpec { name: "horizon", default: "1", kind: ValueKind::Positive, commands: SCHEME, help: "terminal time T" },
    KeySpec {
        name: "steps",
        default: "16",
        kind: ValueKind::Count(1),
        commands: &[D, S, Si, E],
        help: "time steps N (decompose uses dt = horizon/steps)",
    },
    KeySpec {
        name: "truncation",
        default: "0",
        kind: ValueKind::Count(0),
        commands: &[D],
        help: "total-degree truncation of product bases, 0 for all terms",
    },
    KeySpec {
        name: "hermite_degree",
        default: "3",
        kind: ValueKind::Count(1),
        commands: &[D],
        help: "polynomial degree of gaussian bases",
    },
    KeySpec {
        name: "paths",
        default: "1",
        kind: ValueKind::Count(1),
        commands: &[Si],
        help: "number of paths written",
    },
    KeySpec {
        name: "sampler",
        default: "pseudo",
        kind: ValueKind::Choice(catalog::SAMPLERS),
        commands: &[Si, E, C],
        help: "uniform point source id",
    },
    KeySpec { name: "seed", default: "0", kind: ValueKind::Count(0), commands: &[Si, E, C, M], help: "sampler seed" },
    KeySpec {
        name: "samples",
        default: "16384",
        kind: ValueKind::Count(1),
        commands: &[E, C],
        help: "sample count M (the starting count for converge)",
    },
    KeySpec {
        name: "randomizations",
        default: "8",
        kind: ValueKind::Count(8),
        commands: &[E, C],
        help: "independent randomizations of a low-discrepancy sampler",
    },
    KeySpec {
        name: "grid",
        default: "16,32,64,128",
        kind: ValueKind::Counts,
        commands: ORDER,
        help: "step counts of the order fit",
    },
    KeySpec {
        name: "reference",
        default: "fine",
        kind: ValueKind::Reference,
        commands: &[C],
        help: "limit value the errors are measured against",
    },
    KeySpec {
        name: "reference_steps",
        default: "4096",
        kind: ValueKind::Count(1),
        commands: &[C],
        help: "step count of the fine reference",
    },
    KeySpec {
        name: "noise_fraction",
        default: "0.2",
        kind: ValueKind::Fraction,
        commands: ORDER,
        help: "largest allowed ratio of Monte Carlo noise to the smallest error",
    },
    KeySpec {
        name: "max_samples",
        default: "4194304",
        kind: ValueKind::Count(1),
        commands: ORDER,
        help: "sample cap of the noise escalation",
    },
    KeySpec {
        name: "confidence",
        default: "0.95",
        kind: ValueKind::Fraction,
        commands: ORDER,
        help: "confidence level of the slope interval",
    },
    KeySpec {
        name: "exact",
        default: "true",
        kind: ValueKind::Bool,
        commands: ORDER,
        help: "use lattice expectations when they fit the node budget",
    },
    KeySpec {
        name: "key_digits",
        default: "12",
        kind: ValueKind::Count(1),
        commands: LATTICE,
        help: "significant digits at which lattice states merge",
    },
    KeySpec {
        name: "node_budget",
        default: "10000000",
        kind: ValueKind::Count(1),
        commands: LATTICE,
        help: "largest number of lattice nodes",
    },
    KeySpec {
        name: "search_resolution",
        default: "60",
        kind: ValueKind::Count(3),
        commands: &[M],
        help: "grid steps per coordinate of the three-atom design search",
    },
];

pub fn keys_for(command: Command) -> impl Iterator<Item = &'static KeySpec> {
    KEYS.iter().filter(move |k| k.commands.contains(&command))
}

/// Key reference appended to each subcommand's help.
pub fn keys_help(command: Command) -> String {
    let mut out = String::from("Keys (key=value lines in --config files, or trailing arguments):\n");
    for k in keys_for(command) {
        let _ = writeln!(out, "  {:<18}{} [default: {}; {}]", k.name, k.help, k.default, k.kind.describe());
    }
    let presets: Vec<&str> = crate::presets::PRESETS.iter().filter(|p| p.command == command).map(|p| p.name).collect();
    if !presets.is_empty() {
        let _ = write!(out, "\nPresets: {}\n", presets.join(", "));
    }
    out
}

/// One fully resolved run: every key of the command with its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    values: Vec<(&'static str, String)>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig { command, values: keys_for(command).map(|k| (k.name, k.default.to_string())).collect() }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let command = self.command;
        let spec = keys_for(command).find(|k| k.name == key).ok_or_else(|| {
            let message = if KEYS.iter().any(|k| k.name == key) {
                format!("not accepted by `{}`", command.name())
            } else {
                "unknown key".to_string()
            };
            CliError::config(key, message)
        })?;
        let value = value.trim();
        spec.kind.check(value).map_err(|m| CliError::config(key, m))?;
        let slot = self.values.iter_mut().find(|(k, _)| *k == spec.name).expect("key table and values agree");
        slot.1 = value.to_string();
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment. A key may appear
    /// once per source.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen: Vec<String> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key=value, got `{line}`", n + 1)))?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(CliError::config(key, format!("set twice (line {})", n + 1)));
            }
            self.set(key, value)?;
            seen.push(key.to_string());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("`{key}` is not a key of `{}`", self.command.name()))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.get(key).parse().map_err(|_| CliError::config(key, "does not fit in usize"))
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.get(key).parse().expect("validated on set")
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.get(key).parse().expect("validated on set")
    }

    pub fn bool(&self, key: &str) -> bool {
        self.get(key) == "true"
    }

    pub fn f64_list(&self, key: &str) -> Vec<f64> {
        self.get(key).split(',').map(|v| v.trim().parse().expect("validated on set")).collect()
    }

    pub fn usize_list(&self, key: &str) -> Vec<usize> {
        self.get(key).split(',').map(|v| v.trim().parse().expect("validated on set")).collect()
    }

    /// The audit file: a config that reproduces this run.
    pub fn to_audit(&self) -> String {
        let mut out = format!("# dito {}\n", self.command.name());
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}
