use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path as FsPath;

use rayon::prelude::*;

use crate::scalar::Real;
use crate::scheme::{format_sig17, DriverKind, SchemeField, TimeGrid};

use super::FdError;

/// Default bound on the total number of lattice nodes.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;
/// Significant digits of the state key in double precision.
pub const DEFAULT_KEY_DIGITS: u32 = 12;
/// States closer to 0 than this share the key of 0.
pub const ZERO_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeOptions {
    /// States agreeing to this many significant digits (per coordinate) are
    /// merged into one node.
    pub key_digits: u32,
    pub node_budget: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions { key_digits: DEFAULT_KEY_DIGITS, node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl LatticeOptions {
    // Never ask for more digits than the scalar type carries.
    fn effective_digits<T: Real>(&self) -> u32 {
        let carried = (-T::epsilon().as_f64().log10()).floor() as u32;
        self.key_digits.clamp(1, carried.saturating_sub(1).clamp(1, 15))
    }
}

/// Rounded key of one coordinate: sign, decimal exponent and a mantissa of
/// `digits` significant digits packed in one integer.
pub(crate) fn key_component(v: f64, digits: u32) -> i64 {
    if v.abs() < ZERO_SNAP {
        return 0;
    }
    let mut e = v.abs().log10().floor() as i32;
    let mut m = (v.abs() * 10f64.powi(digits as i32 - 1 - e)).round() as i64;
    let top = 10i64.pow(digits);
    if m >= top {
        m /= 10;
        e += 1;
    }
    let packed = (i64::from(e + 512) << 41) | m;
    if v < 0.0 {
        -packed
    } else {
        packed
    }
}

pub(crate) fn state_key<T: Real>(x: &[T], digits: u32) -> Vec<i64> {
    x.iter().map(|v| key_component(v.as_f64(), digits)).collect()
}

#[derive(Debug, Clone, PartialEq)]
struct Level<T> {
    /// Flattened states, `dimension` values per node.
    states: Vec<T>,
    /// Flattened child indices into the next level, one per outcome.
    children: Vec<u32>,
}

/// Reachable states of a scheme from `x0`, level by level, with merged
/// duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T> {
    times: Vec<T>,
    dimension: usize,
    probabilities: Vec<T>,
    levels: Vec<Level<T>>,
    key_digits: u32,
}

impl<T: Real> Lattice<T> {
    pub fn build(
        field: &SchemeField<T>,
        kind: &DriverKind<T>,
        x0: &[T],
        steps: usize,
        horizon: T,
        options: LatticeOptions,
    ) -> Result<Self, FdError> {
        if x0.len() != field.dimension() {
            return Err(FdError::DimensionMismatch { expected: field.dimension(), got: x0.len() });
        }
        if kind.noise_dim() != field.noise_dim() {
            return Err(FdError::DimensionMismatch { expected: field.noise_dim(), got: kind.noise_dim() });
        }
        let grid = TimeGrid::uniform(horizon, steps)?;
        let outcomes = kind.outcomes()?;
        let digits = options.effective_digits::<T>();
        let n = field.dimension();
        let width = outcomes.len();

        let mut levels = vec![Level { states: x0.to_vec(), children: Vec::new() }];
        let mut total = 1usize;
        let mut inc = vec![T::zero(); n];
        let mut next = vec![T::zero(); n];
        let mut scratch = Vec::new();
        for k in 0..steps {
            let dt = grid.dt(k);
            let mut index: HashMap<Vec<i64>, u32> = HashMap::new();
            let mut states = Vec::new();
            let current = levels.last_mut().expect("at least the root level");
            let count = current.states.len() / n;
            let mut children = Vec::with_capacity(count * width);
            for i in 0..count {
                let x = &current.states[i * n..(i + 1) * n];
                for o in &outcomes {
                    field.increment_into(x, dt, &o.innovation, &mut inc, &mut scratch);
                    for d in 0..n {
                        next[d] = x[d] + inc[d];
                    }
                    if next.iter().any(|v| !v.is_finite()) {
                        return Err(FdError::NonFiniteState { step: k + 1 });
                    }
                    let key = state_key(&next, digits);
                    let len = index.len();
                    let id = *index.entry(key).or_insert_with(|| {
                        states.extend_from_slice(&next);
                        len as u32
                    });
                    children.push(id);
                }
            }
            total += index.len();
            if total > options.node_budget {
                return Err(FdError::NodeBudgetExceeded { nodes: total, budget: options.node_budget });
            }
            current.children = children;
            levels.push(Level { states, children: Vec::new() });
        }
        Ok(Lattice {
            times: grid.times().to_vec(),
            dimension: n,
            probabilities: outcomes.iter().map(|o| o.probability).collect(),
            levels,
            key_digits: digits,
        })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> T {
        self.times[self.steps()]
    }

    pub fn dt(&self, k: usize) -> T {
        self.times[k + 1] - self.times[k]
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn key_digits(&self) -> u32 {
        self.key_digits
    }

    /// One probability per one-step outcome, in child order.
    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn level_len(&self, k: usize) -> usize {
        self.levels[k].states.len() / self.dimension
    }

    pub fn node_count(&self) -> usize {
        (0..self.levels.len()).map(|k| self.level_len(k)).sum()
    }

    pub fn state(&self, k: usize, i: usize) -> &[T] {
        &self.levels[k].states[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Child indices (into level `k + 1`) of node `i` at level `k < N`.
    pub fn children(&self, k: usize, i: usize) -> &[u32] {
        let w = self.probabilities.len();
        &self.levels[k].children[i * w..(i + 1) * w]
    }

    /// Index of the node at level `k` whose key matches `x`.
    pub fn find(&self, k: usize, x: &[T]) -> Option<usize> {
        let key = state_key(x, self.key_digits);
        (0..self.level_len(k)).find(|&i| state_key(self.state(k, i), self.key_digits) == key)
    }

    /// `Σ_j p_j next[child_j]` for every node of level `k`, in node order.
    pub(crate) fn average(&self, k: usize, next: &[T]) -> Vec<T> {
        let w = self.probabilities.len();
        let p = &self.probabilities;
        self.levels[k]
            .children
            .par_chunks(w)
            .map(|ch| ch.iter().zip(p).map(|(&c, &pj)| pj * next[c as usize]).sum())
            .collect()
    }

    /// Same average with the outcomes summed in reverse order.
    pub(crate) fn average_reversed(&self, k: usize, next: &[T], i: usize) -> T {
        let ch = self.children(k, i);
        ch.iter().zip(&self.probabilities).rev().map(|(&c, &pj)| pj * next[c as usize]).sum()
    }

    /// Evaluates `g(t_k, x)` at every node of level `k`.
    pub(crate) fn map_level(&self, k: usize, g: &(impl Fn(T, &[T]) -> T + Sync)) -> Vec<T> {
        let t = self.times[k];
        self.levels[k].states.par_chunks(self.dimension).map(|x| g(t, x)).collect()
    }
}

/// Values of a terminal-value problem on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSolution<T> {
    lattice: Lattice<T>,
    values: Vec<Vec<T>>,
    /// `Φ(t_k, x)` at every node of levels `0..N` for a source problem.
    source: Option<Vec<Vec<T>>>,
}

impl<T: Real> LatticeSolution<T> {
    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn times(&self) -> &[T] {
        self.lattice.times()
    }

    pub fn steps(&self) -> usize {
        self.lattice.steps()
    }

    pub fn dimension(&self) -> usize {
        self.lattice.dimension()
    }

    pub fn value(&self, k: usize, i: usize) -> T {
        self.values[k][i]
    }

    pub fn level_values(&self, k: usize) -> &[T] {
        &self.values[k]
    }

    /// `u(t_0, x_0)`.
    pub fn root_value(&self) -> T {
        self.values[0][0]
    }

    /// Value at level `k` for the node whose key matches `x`.
    pub fn value_at(&self, k: usize, x: &[T]) -> Option<T> {
        self.lattice.find(k, x).map(|i| self.values[k][i])
    }

    /// Largest `|(∂^N_t + L^N) u + Φ|` over interior nodes, with the outcome
    /// average recomputed in reverse summation order.
    pub fn residual(&self) -> T {
        let mut worst = T::zero();
        for k in 0..self.steps() {
            let dt = self.lattice.dt(k);
            for i in 0..self.lattice.level_len(k) {
                let avg = self.lattice.average_reversed(k, &self.values[k + 1], i);
                let phi = self.source.as_ref().map_or(T::zero(), |s| s[k][i]);
                let r = ((avg - self.values[k][i]) / dt + phi).abs();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// `t,x1,…,xn,u` rows, level by level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for d in 1..=self.dimension() {
            let _ = write!(out, ",x{d}");
        }
        out.push_str(",u\n");
        for k in 0..=self.steps() {
            let t = format_sig17(self.times()[k].as_f64());
            for i in 0..self.lattice.level_len(k) {
                out.push_str(&t);
                for v in self.lattice.state(k, i) {
                    out.push(',');
                    out.push_str(&format_sig17(v.as_f64()));
                }
                out.push(',');
                out.push_str(&format_sig17(self.values[k][i].as_f64()));
                out.push('\n');
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<FsPath>) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Solves `(∂^N_t + L^N) u = 0`, `u(T, ·) = f`, by backward induction
/// `u(t_k, x) = Σ_i u(t_{k+1}, x + F(x, Δt, y_i)) ν(y_i)` on the lattice of
/// states reachable from `x0`.
pub fn backward_solve<T: Real>(
    field: &SchemeField<T>,
    kind: &DriverKind<T>,
    f: impl Fn(&[T]) -> T + Sync,
    x0: &[T],
    steps: usize,
    horizon: T,
    options: LatticeOptions,
) -> Result<LatticeSolution<T>, FdError> {
    let lattice = Lattice::build(field, kind, x0, steps, horizon, options)?;
    solve_on(lattice, &|_t, x| f(x), None::<&(dyn Fn(T, &[T]) -> T + Sync)>)
}

/// Solves the source problem `v(T, ·) = 0`,
/// `v(t_k, x) = Σ_i v(t_{k+1}, x + F(x, Δt, y_i)) ν(y_i) + Δt Φ(t_k, x)`,
/// so that `v(t_k, x) = Σ_{l=k}^{N-1} Δt E[Φ(t_l, X_{t_l}) | X_{t_k} = x]`
/// and `(∂^N_t + L^N) v = -Φ`.
pub fn feynman_kac_source<T: Real>(
    field: &SchemeField<T>,
    kind: &DriverKind<T>,
    phi: impl Fn(T, &[T]) -> T + Sync,
    x0: &[T],
    steps: usize,
    horizon: T,
    options: LatticeOptions,
) -> Result<LatticeSolution<T>, FdError> {
    let lattice = Lattice::build(field, kind, x0, steps, horizon, options)?;
    solve_on(lattice, &|_t, _x| T::zero(), Some(&phi))
}

fn solve_on<T: Real>(
    lattice: Lattice<T>,
    terminal: &(impl Fn(T, &[T]) -> T + Sync),
    source: Option<&(impl Fn(T, &[T]) -> T + Sync + ?Sized)>,
) -> Result<LatticeSolution<T>, FdError> {
    let steps = lattice.steps();
    let mut values = vec![Vec::new(); steps + 1];
    values[steps] = lattice.map_level(steps, terminal);
    let sources: Option<Vec<Vec<T>>> =
        source.map(|phi| (0..steps).map(|k| lattice.map_level(k, &|t, x| phi(t, x))).collect());
    for k in (0..steps).rev() {
        let mut v = lattice.average(k, &values[k + 1]);
        if let Some(s) = &sources {
            let dt = lattice.dt(k);
            for (vi, &si) in v.iter_mut().zip(&s[k]) {
                *vi = *vi + dt * si;
            }
        }
        if let Some(step) = v.iter().position(|x| !x.is_finite()).map(|_| k) {
            return Err(FdError::NonFiniteValue { step });
        }
        values[k] = v;
    }
    Ok(LatticeSolution { lattice, values, source: sources })
}
