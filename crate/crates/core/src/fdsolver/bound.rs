use std::collections::HashMap;

use crate::scalar::Real;
use crate::stats::fit_loglog;

use super::lattice::{state_key, LatticeSolution};
use super::FdError;

/// Nodes used for one-dimensional Lagrange interpolation of a reference.
pub const INTERPOLATION_NODES: usize = 6;

/// What the coarse solution is compared against.
pub enum Reference<'a, T> {
    /// A solution of the same problem on a finer grid.
    Lattice(&'a LatticeSolution<T>),
    /// A closed-form `u(t, x)`.
    Analytic(&'a dyn Fn(T, &[T]) -> T),
}

/// One probed node of the coarse lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProbe<T> {
    pub time_index: usize,
    pub time: T,
    pub state: Vec<T>,
    /// `|u^N(t, x) - u(t, x)|`.
    pub error: T,
    /// `Σ_{l ≥ k} Δt |E[(∂^N_t + L^N - ∂_t - L) u(t_l, X_{t_l}) | X_{t_k} = x]|`.
    pub defect_sum: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBoundReport<T> {
    pub probes: Vec<BoundProbe<T>>,
    /// Largest `error - defect_sum` over all probes.
    pub max_excess: T,
    /// Largest deviation from the exact identity
    /// `u^N - u = Σ_l Δt E[defect_l]`; measures the reference's own
    /// interpolation error.
    pub identity_residual: T,
}

impl<T: Real> ErrorBoundReport<T> {
    pub fn root(&self) -> &BoundProbe<T> {
        &self.probes[0]
    }

    /// The inequality `error ≤ defect_sum + tolerance` at every probe.
    pub fn holds(&self, tolerance: T) -> bool {
        self.max_excess <= tolerance
    }
}

/// Compares a coarse solution with a reference solution of the same problem
/// at every node of the coarse lattice.
///
/// The reference `u` solves `(∂_t + L) u = 0`, so the consistency defect
/// along `u` is `(∂^N_t + L^N) u`; it is evaluated on the coarse lattice
/// with `u` read from the reference. Lattice references are matched by
/// state key or, in one dimension, interpolated from the nearest
/// [`INTERPOLATION_NODES`] fine nodes.
pub fn error_bound_decomposition<T: Real>(
    reference: Reference<'_, T>,
    coarse: &LatticeSolution<T>,
) -> Result<ErrorBoundReport<T>, FdError> {
    let lat = coarse.lattice();
    let steps = lat.steps();
    // ref_values[k][i] = u(t_k, x_i)
    let mut ref_values: Vec<Vec<T>> = Vec::with_capacity(steps + 1);
    match reference {
        Reference::Analytic(u) => {
            for k in 0..=steps {
                let t = lat.times()[k];
                ref_values.push((0..lat.level_len(k)).map(|i| u(t, lat.state(k, i))).collect());
            }
        }
        Reference::Lattice(fine) => {
            let fl = fine.lattice();
            let horizon_gap = (fl.horizon() - lat.horizon()).abs();
            if fl.steps() % steps != 0 || horizon_gap > T::epsilon() * lat.horizon() * T::lit(16.0) {
                return Err(FdError::GridMismatch { coarse: steps, fine: fl.steps() });
            }
            if fl.dimension() != lat.dimension() {
                return Err(FdError::DimensionMismatch { expected: lat.dimension(), got: fl.dimension() });
            }
            let ratio = fl.steps() / steps;
            for k in 0..steps {
                let reader = LevelReader::new(fine, k * ratio);
                let mut row = Vec::with_capacity(lat.level_len(k));
                for i in 0..lat.level_len(k) {
                    row.push(reader.value(lat.state(k, i)).ok_or(FdError::MissingReferenceState { time_index: k })?);
                }
                ref_values.push(row);
            }
            // Both solve the same terminal problem.
            ref_values.push(coarse.level_values(steps).to_vec());
        }
    }

    // defects[l][i] = (∂^N_t + L^N) u at node i of level l
    let defects: Vec<Vec<T>> = (0..steps)
        .map(|l| {
            let avg = lat.average(l, &ref_values[l + 1]);
            let dt = lat.dt(l);
            avg.iter().zip(&ref_values[l]).map(|(&a, &r)| (a - r) / dt).collect()
        })
        .collect();

    let mut sums: Vec<Vec<T>> = (0..=steps).map(|k| vec![T::zero(); lat.level_len(k)]).collect();
    let mut signed: Vec<Vec<T>> = sums.clone();
    for (l, defect) in defects.iter().enumerate() {
        let dt = lat.dt(l);
        let mut g = defect.clone();
        for k in (0..=l).rev() {
            if k < l {
                g = lat.average(k, &g);
            }
            for i in 0..g.len() {
                sums[k][i] = sums[k][i] + dt * g[i].abs();
                signed[k][i] = signed[k][i] + dt * g[i];
            }
        }
    }

    let mut probes = Vec::with_capacity(lat.node_count());
    let mut max_excess = T::neg_infinity();
    let mut identity_residual = T::zero();
    for k in 0..=steps {
        for i in 0..lat.level_len(k) {
            let diff = coarse.value(k, i) - ref_values[k][i];
            let error = diff.abs();
            max_excess = max_excess.max(error - sums[k][i]);
            identity_residual = identity_residual.max((diff - signed[k][i]).abs());
            probes.push(BoundProbe {
                time_index: k,
                time: lat.times()[k],
                state: lat.state(k, i).to_vec(),
                error,
                defect_sum: sums[k][i],
            });
        }
    }
    Ok(ErrorBoundReport { probes, max_excess, identity_residual })
}

/// Least-squares slope of `log error` against `log(1/N)` over several
/// coarse solutions compared with one reference (errors at the root node).
pub fn root_error_slope<T: Real>(reports: &[(usize, &ErrorBoundReport<T>)]) -> Option<f64> {
    let xs: Vec<f64> = reports.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let ys: Vec<f64> = reports.iter().map(|(_, r)| r.root().error.as_f64()).collect();
    fit_loglog(&xs, &ys).map(|f| f.slope)
}

struct LevelReader<'a, T> {
    sol: &'a LatticeSolution<T>,
    level: usize,
    index: HashMap<Vec<i64>, usize>,
    sorted: Vec<(T, T)>,
}

impl<'a, T: Real> LevelReader<'a, T> {
    fn new(sol: &'a LatticeSolution<T>, level: usize) -> Self {
        let lat = sol.lattice();
        let digits = lat.key_digits();
        let mut index = HashMap::new();
        for i in 0..lat.level_len(level) {
            index.entry(state_key(lat.state(level, i), digits)).or_insert(i);
        }
        let mut sorted = Vec::new();
        if lat.dimension() == 1 {
            sorted = (0..lat.level_len(level)).map(|i| (lat.state(level, i)[0], sol.value(level, i))).collect();
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite states"));
        }
        LevelReader { sol, level, index, sorted }
    }

    fn value(&self, x: &[T]) -> Option<T> {
        let lat = self.sol.lattice();
        if let Some(&i) = self.index.get(&state_key(x, lat.key_digits())) {
            return Some(self.sol.value(self.level, i));
        }
        if self.sorted.len() < 2 {
            return None;
        }
        let x = x[0];
        let (lo, hi) = (self.sorted[0].0, self.sorted[self.sorted.len() - 1].0);
        if x < lo || x > hi {
            return None;
        }
        let m = INTERPOLATION_NODES.min(self.sorted.len());
        let pos = self.sorted.partition_point(|p| p.0 < x);
        let start = pos.saturating_sub(m / 2).min(self.sorted.len() - m);
        let nodes = &self.sorted[start..start + m];
        let mut acc = T::zero();
        for (j, &(xj, yj)) in nodes.iter().enumerate() {
            let mut l = T::one();
            for (q, &(xq, _)) in nodes.iter().enumerate() {
                if q != j {
                    l = l * (x - xq) / (xj - xq);
                }
            }
            acc = acc + l * yj;
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::IncrementLaw;
    use crate::fdsolver::{backward_solve, LatticeOptions};
    use crate::scheme::{DriverKind, SchemeField};

    fn solve(f: fn(&[f64]) -> f64, n: usize) -> LatticeSolution<f64> {
        backward_solve(
            &SchemeField::constant(1, 1.0, 0.0),
            &DriverKind::Product(vec![IncrementLaw::symmetric_bernoulli()]),
            f,
            &[0.0],
            n,
            1.0,
            LatticeOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn quadratic_payoff_has_no_error_and_no_defect() {
        let coarse = solve(|x| x[0] * x[0], 8);
        let exact = |t: f64, x: &[f64]| x[0] * x[0] + 1.0 - t;
        let report = error_bound_decomposition(Reference::Analytic(&exact), &coarse).unwrap();
        for p in &report.probes {
            assert!(p.error < 1e-10 && p.defect_sum < 1e-10);
        }
        let fine = solve(|x| x[0] * x[0], 64);
        let report = error_bound_decomposition(Reference::Lattice(&fine), &coarse).unwrap();
        assert!(report.probes.iter().all(|p| p.error < 1e-10 && p.defect_sum < 1e-10));
    }

    #[test]
    fn quartic_error_is_bounded_by_defect_sum() {
        let fine = solve(|x| x[0].powi(4), 1024);
        let mut reports = Vec::new();
        for n in [8, 16, 32] {
            let coarse = solve(|x| x[0].powi(4), n);
            let r = error_bound_decomposition(Reference::Lattice(&fine), &coarse).unwrap();
            assert!(r.holds(1e-10), "excess {}", r.max_excess);
            assert!(r.identity_residual < 1e-9);
            // u^N(0, 0) = 3 - 2/N against the fine 3 - 2/1024.
            assert!((r.root().error - (2.0 / n as f64 - 2.0 / 1024.0)).abs() < 1e-10);
            reports.push((n, r));
        }
        let refs: Vec<(usize, &ErrorBoundReport<f64>)> = reports.iter().map(|(n, r)| (*n, r)).collect();
        let slope = root_error_slope(&refs).unwrap();
        assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn grid_mismatch() {
        let fine = solve(|x| x[0], 10);
        let coarse = solve(|x| x[0], 4);
        assert!(matches!(
            error_bound_decomposition(Reference::Lattice(&fine), &coarse),
            Err(FdError::GridMismatch { .. })
        ));
    }
}
