use std::fmt::Write as _;
use std::io;
use std::path::Path as FsPath;

use crate::dif::StatePoint;
use crate::scalar::Real;

use super::driver::{DriverKind, DriverSource};
use super::field::SchemeField;
use super::SchemeError;

/// Bound on the number of enumerated paths.
pub const MAX_ENUMERATED_PATHS: u128 = 1_000_000;

/// Uniform time grid `t_k = T·k/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    times: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn uniform(horizon: T, steps: usize) -> Result<Self, SchemeError> {
        if steps == 0 {
            return Err(SchemeError::ZeroSteps);
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(SchemeError::NonPositiveHorizon(horizon.as_f64()));
        }
        let n = T::from_count(steps);
        let times = (0..=steps).map(|k| horizon * T::from_count(k) / n).collect();
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> T {
        *self.times.last().expect("non-empty grid")
    }

    /// `t_{k+1} - t_k`.
    #[inline]
    pub fn dt(&self, k: usize) -> T {
        self.times[k + 1] - self.times[k]
    }

    /// Nominal step `T/N`.
    pub fn nominal_dt(&self) -> T {
        self.horizon() / T::from_count(self.steps())
    }
}

/// One simulated trajectory with the innovations that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    pub times: Vec<T>,
    pub states: Vec<StatePoint<T>>,
    /// Innovation `y_k` fed to `F` at step `k`.
    pub increments: Vec<Vec<T>>,
    /// Uniform variates consumed at step `k` (empty for enumerated paths).
    pub uniforms: Vec<Vec<f64>>,
}

impl<T: Real> Path<T> {
    pub fn terminal(&self) -> &[T] {
        &self.states.last().expect("non-empty path").state
    }

    /// Largest deviation when re-applying `F` to the recorded innovations;
    /// zero for a faithful path.
    pub fn replay_error(&self, field: &SchemeField<T>) -> T {
        let mut worst = T::zero();
        for k in 0..self.increments.len() {
            let dt = self.times[k + 1] - self.times[k];
            let next = field.step(&self.states[k].state, dt, &self.increments[k]);
            for (a, b) in next.iter().zip(&self.states[k + 1].state) {
                worst = worst.max((*a - *b).abs());
            }
        }
        worst
    }

    /// `ΔW_k = y_k √Δt_k`.
    pub fn driver_increment(&self, k: usize) -> Vec<T> {
        let sq = (self.times[k + 1] - self.times[k]).sqrt();
        self.increments[k].iter().map(|&y| y * sq).collect()
    }

    /// CSV with header `t,x1,...,xn`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |s| s.state.len());
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for s in &self.states {
            out.push_str(&format_sig17(s.time.as_f64()));
            for v in &s.state {
                out.push(',');
                out.push_str(&format_sig17(v.as_f64()));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<FsPath>) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Decimal with 17 significant digits (round-trips every `f64`).
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn validate<T: Real>(field: &SchemeField<T>, kind: &DriverKind<T>, x0: &[T]) -> Result<(), SchemeError> {
    if x0.len() != field.dimension() {
        return Err(SchemeError::DimensionMismatch { expected: field.dimension(), got: x0.len() });
    }
    if kind.noise_dim() != field.noise_dim() {
        return Err(SchemeError::DimensionMismatch { expected: field.noise_dim(), got: kind.noise_dim() });
    }
    Ok(())
}

/// Simulates the path with index 0 of the source's sampler.
pub fn simulate_path<T: Real>(
    field: &SchemeField<T>,
    source: &DriverSource<T>,
    x0: &[T],
    steps: usize,
    horizon: T,
) -> Result<Path<T>, SchemeError> {
    simulate_path_indexed(field, source, x0, steps, horizon, 0)
}

/// Simulates path number `index`: its uniforms are point `index` of the
/// sampler in `[0, 1)^{N·u}` with `u` uniforms per step, step-major.
pub fn simulate_path_indexed<T: Real>(
    field: &SchemeField<T>,
    source: &DriverSource<T>,
    x0: &[T],
    steps: usize,
    horizon: T,
    index: u64,
) -> Result<Path<T>, SchemeError> {
    validate(field, &source.kind, x0)?;
    let grid = TimeGrid::uniform(horizon, steps)?;
    let per_step = source.kind.uniforms_per_step();
    source.sampler.check_capacity(index + 1, per_step * steps)?;
    let mut point = vec![0.0; per_step * steps];
    source.sampler.point(index, &mut point);

    let noise = source.kind.noise_dim();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(StatePoint::new(0, grid.times()[0], x0.to_vec()));
    let mut increments = Vec::with_capacity(steps);
    let mut uniforms = Vec::with_capacity(steps);
    let mut inc = vec![T::zero(); field.dimension()];
    let mut scratch = Vec::new();
    for k in 0..steps {
        let u = &point[k * per_step..(k + 1) * per_step];
        let mut y = vec![T::zero(); noise];
        source.kind.innovation(u, &mut y);
        let x = &states[k].state;
        field.increment_into(x, grid.dt(k), &y, &mut inc, &mut scratch);
        let next: Vec<T> = x.iter().zip(&inc).map(|(&a, &b)| a + b).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SchemeError::NonFiniteState { step: k + 1 });
        }
        states.push(StatePoint::new(k + 1, grid.times()[k + 1], next));
        increments.push(y);
        uniforms.push(u.to_vec());
    }
    Ok(Path { times: grid.times().to_vec(), states, increments, uniforms })
}

/// Exhaustive tree of paths with their exact probabilities.
pub fn enumerate_paths<T: Real>(
    field: &SchemeField<T>,
    kind: &DriverKind<T>,
    x0: &[T],
    steps: usize,
    horizon: T,
) -> Result<Vec<(Path<T>, T)>, SchemeError> {
    validate(field, kind, x0)?;
    let grid = TimeGrid::uniform(horizon, steps)?;
    let per_step = kind.outcome_count().ok_or_else(|| match kind {
        DriverKind::Product(laws) => SchemeError::NotEnumerable(
            laws.iter().map(|l| l.kind()).find(|k| *k != crate::basis::LawKind::FiniteSupport).expect("non-finite law"),
        ),
        _ => SchemeError::ExplosionGuard { paths: u128::MAX },
    })?;
    let total = (0..steps).try_fold(1u128, |acc, _| acc.checked_mul(per_step)).unwrap_or(u128::MAX);
    if total > MAX_ENUMERATED_PATHS {
        return Err(SchemeError::ExplosionGuard { paths: total });
    }
    let outcomes = kind.outcomes()?;
    let mut out = Vec::with_capacity(total as usize);
    let start = StatePoint::new(0, grid.times()[0], x0.to_vec());
    let mut states = vec![start];
    let mut increments = Vec::new();
    expand(field, &grid, &outcomes, &mut states, &mut increments, T::one(), &mut out)?;
    Ok(out)
}

fn expand<T: Real>(
    field: &SchemeField<T>,
    grid: &TimeGrid<T>,
    outcomes: &[super::driver::Outcome<T>],
    states: &mut Vec<StatePoint<T>>,
    increments: &mut Vec<Vec<T>>,
    probability: T,
    out: &mut Vec<(Path<T>, T)>,
) -> Result<(), SchemeError> {
    let k = states.len() - 1;
    if k == grid.steps() {
        out.push((
            Path {
                times: grid.times().to_vec(),
                states: states.clone(),
                increments: increments.clone(),
                uniforms: Vec::new(),
            },
            probability,
        ));
        return Ok(());
    }
    for o in outcomes {
        let next = field.step(&states[k].state, grid.dt(k), &o.innovation);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SchemeError::NonFiniteState { step: k + 1 });
        }
        states.push(StatePoint::new(k + 1, grid.times()[k + 1], next));
        increments.push(o.innovation.clone());
        expand(field, grid, outcomes, states, increments, probability * o.probability, out)?;
        states.pop();
        increments.pop();
    }
    Ok(())
}
