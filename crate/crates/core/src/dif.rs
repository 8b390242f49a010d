//! One-step discrete Itô decompositions.
//!
//! For a function `f` and a one-step transition `X_k → X_{k+1}` driven by an
//! innovation with law `ν`, the increment `f(t_{k+1}, X_{k+1}) - f(t_k, X_k)`
//! is expanded in an orthonormal basis of `L²(ν)` conditioned on `X_k`:
//!
//! * a martingale part `Σ_j a_j ΔW^j` (first chaos),
//! * a drift part `b Δt` (the conditional mean of the increment),
//! * correction terms `Σ_l c_l Ψ_l(ξ)` (higher chaoses).
//!
//! Every coefficient integral is evaluated at the conditioning state `X_k`.
//! Integrals are exact sums over atoms for finite laws and over dyadic
//! blocks for Walsh drivers; Gaussian laws use the 200-node Gauss–Hermite
//! rule. Correction sets are always finite, and [`spanning_defect`] reports
//! the `L²(ν)` norm of what they carry.

use thiserror::Error;

use crate::basis::{
    dyadic_block_digits, dyadic_digits, BasisError, IncrementLaw, LawKind, OrthonormalSystem, WalshIndex,
};
use crate::scalar::Real;
use crate::scheme::{JointLaw, SchemeField};

/// Largest number of quadrature outcomes a product decomposition will sum.
pub const MAX_DECOMPOSITION_OUTCOMES: usize = 1_000_000;
/// Finest dyadic resolution summed block by block.
pub const MAX_DECOMPOSITION_RESOLUTION: u32 = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DifError {
    #[error("truncation must be at least 2 (got {0})")]
    TruncationTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis {component} has {len} functions, truncation needs {needed}")]
    BasisTooShort { component: usize, len: usize, needed: usize },
    #[error("increment law {component} has mean {mean}, expected 0")]
    NonZeroMean { component: usize, mean: f64 },
    #[error("basis {component} was built for a different law")]
    BasisLawMismatch { component: usize },
    #[error("{0:?} laws cannot be integrated here")]
    UnsupportedLaw(LawKind),
    #[error("{0} quadrature outcomes exceed the bound of 10^6")]
    TooManyOutcomes(usize),
    #[error("Walsh index {0} is a driver, the constant, or repeated")]
    OverlappingIndices(WalshIndex),
    #[error("dyadic resolution {0} is too fine to sum exactly")]
    ResolutionTooFine(u32),
    #[error("driver coordinates are not mean-zero and orthonormal (defect {0})")]
    DriversNotOrthonormal(f64),
    #[error("time step must be positive (got {0})")]
    NonPositiveStep(f64),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// A point `(t_k, X_{t_k})` on a path.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePoint<T> {
    pub time_index: usize,
    pub time: T,
    pub state: Vec<T>,
}

impl<T: Real> StatePoint<T> {
    pub fn new(time_index: usize, time: T, state: Vec<T>) -> Self {
        StatePoint { time_index, time, state }
    }

    pub fn origin(state: Vec<T>) -> Self {
        Self::new(0, T::zero(), state)
    }

    pub fn dimension(&self) -> usize {
        self.state.len()
    }
}

/// Label of a correction term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CorrectionKey {
    /// Multi-index `(l_1, …, l_n)` of the tensor basis `Π_j H^j_{l_j}`.
    Tensor(Vec<usize>),
    /// Walsh function.
    Walsh(WalshIndex),
    /// `l`-th function completing the drivers to a basis of a finite law.
    Completion(usize),
}

/// The realized innovation of one step.
#[derive(Debug, Clone, PartialEq)]
pub enum Realization<T> {
    /// Component innovations `ξ^1, …, ξ^n` of a product law.
    Components(Vec<T>),
    /// The uniform variate `ξ ∈ [0, 1)` of a Walsh-driven step.
    Unit(T),
    /// Index of the atom drawn from a joint finite law.
    Atom(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum TermBasis<T> {
    Product { systems: Vec<OrthonormalSystem<T>> },
    Walsh { drivers: Vec<WalshIndex> },
    Joint { law: JointLaw<T>, completion: Vec<Vec<T>> },
}

/// Martingale, drift and correction coefficients of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosDecomposition<T> {
    /// One per driver; multiplies `W^j_{k+1} - W^j_k`.
    pub martingale_coeffs: Vec<T>,
    /// Multiplies `t_{k+1} - t_k`.
    pub drift_coeff: T,
    pub corrections: Vec<(CorrectionKey, T)>,
    pub dt: T,
    /// `f(t_k, X_k)`.
    pub current_value: T,
    basis: TermBasis<T>,
}

impl<T: Real> ChaosDecomposition<T> {
    /// `W^j_{k+1} - W^j_k` for the realized innovation.
    pub fn driver_increments(&self, r: &Realization<T>) -> Vec<T> {
        match (&self.basis, r) {
            (TermBasis::Product { .. }, Realization::Components(xi)) => xi.clone(),
            (TermBasis::Walsh { drivers }, Realization::Unit(u)) => {
                let digits = dyadic_digits(*u).expect("realization in [0, 1)");
                let sq = self.dt.sqrt();
                drivers.iter().map(|w| w.value_at_digits::<T>(digits) * sq).collect()
            }
            (TermBasis::Joint { law, .. }, Realization::Atom(i)) => {
                let sq = self.dt.sqrt();
                law.atoms()[*i].iter().map(|&y| y * sq).collect()
            }
            _ => panic!("realization does not match the decomposition's innovation type"),
        }
    }

    pub fn martingale_part(&self, r: &Realization<T>) -> T {
        self.driver_increments(r).iter().zip(&self.martingale_coeffs).map(|(&w, &a)| w * a).sum()
    }

    pub fn drift_part(&self) -> T {
        self.drift_coeff * self.dt
    }

    /// `Ψ_l(ξ)` for every correction key, in order.
    pub fn correction_values(&self, r: &Realization<T>) -> Vec<T> {
        match (&self.basis, r) {
            (TermBasis::Product { systems }, Realization::Components(xi)) => {
                let evals: Vec<Vec<T>> = systems.iter().zip(xi).map(|(s, &x)| s.eval_all(x)).collect();
                self.corrections
                    .iter()
                    .map(|(key, _)| match key {
                        CorrectionKey::Tensor(l) => {
                            l.iter().enumerate().fold(T::one(), |acc, (j, &lj)| acc * evals[j][lj])
                        }
                        _ => unreachable!("product decompositions carry tensor keys"),
                    })
                    .collect()
            }
            (TermBasis::Walsh { .. }, Realization::Unit(u)) => {
                let digits = dyadic_digits(*u).expect("realization in [0, 1)");
                self.corrections
                    .iter()
                    .map(|(key, _)| match key {
                        CorrectionKey::Walsh(w) => w.value_at_digits(digits),
                        _ => unreachable!("Walsh decompositions carry Walsh keys"),
                    })
                    .collect()
            }
            (TermBasis::Joint { completion, .. }, Realization::Atom(i)) => {
                completion.iter().map(|psi| psi[*i]).collect()
            }
            _ => panic!("realization does not match the decomposition's innovation type"),
        }
    }

    pub fn correction_part(&self, r: &Realization<T>) -> T {
        self.correction_values(r).iter().zip(&self.corrections).map(|(&v, (_, c))| v * *c).sum()
    }

    /// Martingale + drift + correction parts: the reconstructed
    /// `f(t_{k+1}, X_{k+1}) - f(t_k, X_k)`.
    pub fn reconstruct(&self, r: &Realization<T>) -> T {
        self.martingale_part(r) + self.drift_part() + self.correction_part(r)
    }

    /// `L²(ν)` norm of the correction part.
    pub fn correction_norm(&self) -> T {
        self.corrections.iter().fold(T::zero(), |acc, (_, c)| acc + *c * *c).sqrt()
    }

    pub fn correction(&self, key: &CorrectionKey) -> Option<T> {
        self.corrections.iter().find(|(k, _)| k == key).map(|(_, c)| *c)
    }
}

/// `L²(ν)` norm of the correction part of `decomp`. With an exhaustive
/// correction set this vanishes exactly when the constant and the drivers
/// span `L²(ν)`.
pub fn spanning_defect<T: Real>(decomp: &ChaosDecomposition<T>) -> T {
    decomp.correction_norm()
}

fn check_mean_zero<T: Real>(law: &IncrementLaw<T>, component: usize) -> Result<(), DifError> {
    let mean = law.mean();
    let scale = law.moment(2).sqrt().max(T::one());
    if mean.abs() > T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * scale {
        return Err(DifError::NonZeroMean { component, mean: mean.as_f64() });
    }
    Ok(())
}

/// Decomposition for a one-dimensional random walk `W_{k+1} = W_k + ξ`.
///
/// The clock is `Δt = E[ξ²]`, so that the drift part is the conditional
/// mean `∫ {f(W + x) - f(W)} ν(dx)`. Corrections are `H_2, …,
/// H_{truncation-1}`; with a finite law and `truncation = #atoms` the
/// expansion is exact.
pub fn decompose_walk_1d<T: Real>(
    f: impl Fn(T) -> T,
    state: &StatePoint<T>,
    law: &IncrementLaw<T>,
    basis: &OrthonormalSystem<T>,
    truncation: usize,
) -> Result<ChaosDecomposition<T>, DifError> {
    if state.dimension() != 1 {
        return Err(DifError::DimensionMismatch { expected: 1, got: state.dimension() });
    }
    let dt = law.moment(2);
    let w = state.state[0];
    decompose_product(
        |_t, x| f(x[0]),
        state,
        |x, y, out| out[0] = x[0] + y[0],
        std::slice::from_ref(law),
        std::slice::from_ref(basis),
        truncation,
        dt,
    )
    .map(|mut d| {
        // `f` ignores time; keep the value at `W` exactly.
        d.current_value = f(w);
        d
    })
}

/// Decomposition for an `n`-dimensional walk with independent components
/// `W^j_{k+1} = W^j_k + ξ^j`, `f` evaluated as `f(t, x)`.
///
/// Corrections range over tensor multi-indices with total degree
/// `2 ≤ Σ l_j < truncation` and `l_j` below the length of basis `j`.
pub fn decompose_multidim<T: Real>(
    f: impl Fn(T, &[T]) -> T,
    state: &StatePoint<T>,
    laws: &[IncrementLaw<T>],
    bases: &[OrthonormalSystem<T>],
    truncation: usize,
    dt: T,
) -> Result<ChaosDecomposition<T>, DifError> {
    if state.dimension() != laws.len() {
        return Err(DifError::DimensionMismatch { expected: laws.len(), got: state.dimension() });
    }
    decompose_product(
        f,
        state,
        |x, y, out| {
            for i in 0..out.len() {
                out[i] = x[i] + y[i];
            }
        },
        laws,
        bases,
        truncation,
        dt,
    )
}

/// Decomposition for `X_{k+1} = X_k + F(X_k, Δt, ξ)` with independent
/// component innovations `ξ^j ~ ν_j`; the martingale increments are
/// `W^j_{k+1} - W^j_k = ξ^j`.
pub fn decompose_scheme<T: Real>(
    f: impl Fn(T, &[T]) -> T,
    state: &StatePoint<T>,
    field: &SchemeField<T>,
    laws: &[IncrementLaw<T>],
    bases: &[OrthonormalSystem<T>],
    truncation: usize,
    dt: T,
) -> Result<ChaosDecomposition<T>, DifError> {
    if state.dimension() != field.dimension() {
        return Err(DifError::DimensionMismatch { expected: field.dimension(), got: state.dimension() });
    }
    if laws.len() != field.noise_dim() {
        return Err(DifError::DimensionMismatch { expected: field.noise_dim(), got: laws.len() });
    }
    let mut scratch = Vec::new();
    let mut inc = vec![T::zero(); field.dimension()];
    decompose_product(
        f,
        state,
        |x, y, out| {
            field.increment_into(x, dt, y, &mut inc, &mut scratch);
            for i in 0..out.len() {
                out[i] = x[i] + inc[i];
            }
        },
        laws,
        bases,
        truncation,
        dt,
    )
}

/// Smallest truncation making a product decomposition exhaustive.
pub fn full_truncation<T: Real>(bases: &[OrthonormalSystem<T>]) -> usize {
    bases.iter().map(|b| b.len() - 1).sum::<usize>() + 1
}

fn tensor_indices(lengths: &[usize], truncation: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; lengths.len()];
    fn rec(
        j: usize,
        degree: usize,
        lengths: &[usize],
        truncation: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j == lengths.len() {
            if degree >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for l in 0..lengths[j] {
            if degree + l >= truncation {
                break;
            }
            cur[j] = l;
            rec(j + 1, degree + l, lengths, truncation, cur, out);
        }
        cur[j] = 0;
    }
    rec(0, 0, lengths, truncation, &mut current, &mut out);
    // Lower total degree first, then lexicographic.
    out.sort_by(|a, b| a.iter().sum::<usize>().cmp(&b.iter().sum::<usize>()).then_with(|| a.cmp(b)));
    out
}

#[allow(clippy::too_many_arguments)]
fn decompose_product<T: Real>(
    f: impl Fn(T, &[T]) -> T,
    state: &StatePoint<T>,
    mut next_state: impl FnMut(&[T], &[T], &mut [T]),
    laws: &[IncrementLaw<T>],
    bases: &[OrthonormalSystem<T>],
    truncation: usize,
    dt: T,
) -> Result<ChaosDecomposition<T>, DifError> {
    if truncation < 2 {
        return Err(DifError::TruncationTooSmall(truncation));
    }
    if !(dt > T::zero()) {
        return Err(DifError::NonPositiveStep(dt.as_f64()));
    }
    if bases.len() != laws.len() {
        return Err(DifError::DimensionMismatch { expected: laws.len(), got: bases.len() });
    }
    let mut nodes = Vec::with_capacity(laws.len());
    for (j, (law, basis)) in laws.iter().zip(bases).enumerate() {
        if basis.law() != law {
            return Err(DifError::BasisLawMismatch { component: j });
        }
        if basis.len() < 2 {
            return Err(DifError::BasisTooShort { component: j, len: basis.len(), needed: 2 });
        }
        check_mean_zero(law, j)?;
        nodes.push(law.quadrature().ok_or(DifError::UnsupportedLaw(law.kind()))?);
    }
    if laws.len() == 1 && bases[0].len() < truncation {
        return Err(DifError::BasisTooShort { component: 0, len: bases[0].len(), needed: truncation });
    }
    let total = nodes.iter().try_fold(1usize, |acc, q| acc.checked_mul(q.len())).unwrap_or(usize::MAX);
    if total > MAX_DECOMPOSITION_OUTCOMES {
        return Err(DifError::TooManyOutcomes(total));
    }

    let n = laws.len();
    let lengths: Vec<usize> = bases.iter().map(OrthonormalSystem::len).collect();
    let keys = tensor_indices(&lengths, truncation);
    // evals[j][i][l] = H^j_l(node_i of component j)
    let evals: Vec<Vec<Vec<T>>> =
        nodes.iter().zip(bases).map(|(q, b)| q.iter().map(|(x, _)| b.eval_all(*x)).collect()).collect();
    let second: Vec<T> = laws.iter().map(|l| l.moment(2)).collect();

    let t_next = state.time + dt;
    let current_value = f(state.time, &state.state);
    let mut y = vec![T::zero(); n];
    let mut next = vec![T::zero(); state.dimension()];
    let mut idx = vec![0usize; n];
    let mut mart = vec![T::zero(); n];
    let mut drift = T::zero();
    let mut corr = vec![T::zero(); keys.len()];
    for _ in 0..total {
        let mut weight = T::one();
        for j in 0..n {
            let (x, w) = nodes[j][idx[j]];
            y[j] = x;
            weight = weight * w;
        }
        next_state(&state.state, &y, &mut next);
        let v = f(t_next, &next);
        let wv = weight * v;
        for j in 0..n {
            mart[j] = mart[j] + wv * y[j];
        }
        drift = drift + weight * (v - current_value);
        for (c, key) in corr.iter_mut().zip(&keys) {
            let psi = key.iter().enumerate().fold(T::one(), |acc, (j, &l)| acc * evals[j][idx[j]][l]);
            *c = *c + wv * psi;
        }
        // mixed-radix increment, last component fastest
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < nodes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    for j in 0..n {
        mart[j] = mart[j] / second[j];
    }
    Ok(ChaosDecomposition {
        martingale_coeffs: mart,
        drift_coeff: drift / dt,
        corrections: keys.into_iter().map(CorrectionKey::Tensor).zip(corr).collect(),
        dt,
        current_value,
        basis: TermBasis::Product { systems: bases.to_vec() },
    })
}

/// Decomposition of a Walsh-driven weak scheme:
/// `X_{k+1} = X_k + F(X_k, Δt, H(ξ))`, `ξ` uniform on `[0, 1)`,
/// `H = (H_1, …, H_n)` the driver Walsh functions and
/// `W^j_{k+1} - W^j_k = H_j(ξ)√Δt`.
///
/// Integrals are exact sums over the dyadic blocks at the finest resolution
/// among drivers and corrections. Use [`crate::basis::walsh_completion`] for
/// an exhaustive correction set.
pub fn decompose_weak_scheme<T: Real>(
    f: impl Fn(T, &[T]) -> T,
    state: &StatePoint<T>,
    field: &SchemeField<T>,
    unit_law: &IncrementLaw<T>,
    drivers: &[WalshIndex],
    correction_indices: &[WalshIndex],
    dt: T,
) -> Result<ChaosDecomposition<T>, DifError> {
    if unit_law.kind() != LawKind::LebesgueUnit {
        return Err(DifError::UnsupportedLaw(unit_law.kind()));
    }
    if !(dt > T::zero()) {
        return Err(DifError::NonPositiveStep(dt.as_f64()));
    }
    if state.dimension() != field.dimension() {
        return Err(DifError::DimensionMismatch { expected: field.dimension(), got: state.dimension() });
    }
    if drivers.len() != field.noise_dim() {
        return Err(DifError::DimensionMismatch { expected: field.noise_dim(), got: drivers.len() });
    }
    let mut seen: std::collections::HashSet<WalshIndex> = drivers.iter().copied().collect();
    if seen.len() != drivers.len() || seen.contains(&WalshIndex::CONSTANT) {
        let dup = drivers.iter().find(|w| w.is_constant()).copied().unwrap_or(drivers[0]);
        return Err(DifError::OverlappingIndices(dup));
    }
    for &c in correction_indices {
        if c.is_constant() || !seen.insert(c) {
            return Err(DifError::OverlappingIndices(c));
        }
    }
    let resolution = drivers.iter().chain(correction_indices).map(|w| w.max_factor()).max().unwrap_or(0);
    if resolution > MAX_DECOMPOSITION_RESOLUTION {
        return Err(DifError::ResolutionTooFine(resolution));
    }

    let n = drivers.len();
    let t_next = state.time + dt;
    let current_value = f(state.time, &state.state);
    let blocks = 1u64 << resolution;
    let weight = T::one() / T::lit(blocks as f64);
    let mut y = vec![T::zero(); n];
    let mut inc = vec![T::zero(); field.dimension()];
    let mut next = vec![T::zero(); field.dimension()];
    let mut scratch = Vec::new();
    let mut mart = vec![T::zero(); n];
    let mut drift = T::zero();
    let mut corr = vec![T::zero(); correction_indices.len()];
    for k in 0..blocks {
        let digits = dyadic_block_digits(resolution, k);
        for (yj, w) in y.iter_mut().zip(drivers) {
            *yj = w.value_at_digits(digits);
        }
        field.increment_into(&state.state, dt, &y, &mut inc, &mut scratch);
        for i in 0..next.len() {
            next[i] = state.state[i] + inc[i];
        }
        let v = f(t_next, &next);
        let wv = weight * v;
        for j in 0..n {
            mart[j] = mart[j] + wv * y[j];
        }
        drift = drift + weight * (v - current_value);
        for (c, w) in corr.iter_mut().zip(correction_indices) {
            *c = *c + wv * w.value_at_digits::<T>(digits);
        }
    }
    let sq = dt.sqrt();
    Ok(ChaosDecomposition {
        martingale_coeffs: mart.into_iter().map(|m| m / sq).collect(),
        drift_coeff: drift / dt,
        corrections: correction_indices.iter().map(|&w| CorrectionKey::Walsh(w)).zip(corr).collect(),
        dt,
        current_value,
        basis: TermBasis::Walsh { drivers: drivers.to_vec() },
    })
}

/// Decomposition of a weak scheme driven by a finite joint law whose
/// coordinates are the drivers: `X_{k+1} = X_k + F(X_k, Δt, g)`,
/// `W^j_{k+1} - W^j_k = g_j √Δt`.
///
/// The correction set completes `{1, g_1, …, g_n}` to an orthonormal basis
/// of `L²(ν)` (so it has `#G - n - 1` members and is always exhaustive).
pub fn decompose_joint_scheme<T: Real>(
    f: impl Fn(T, &[T]) -> T,
    state: &StatePoint<T>,
    field: &SchemeField<T>,
    law: &JointLaw<T>,
    dt: T,
) -> Result<ChaosDecomposition<T>, DifError> {
    if !(dt > T::zero()) {
        return Err(DifError::NonPositiveStep(dt.as_f64()));
    }
    if state.dimension() != field.dimension() {
        return Err(DifError::DimensionMismatch { expected: field.dimension(), got: state.dimension() });
    }
    if law.dimension() != field.noise_dim() {
        return Err(DifError::DimensionMismatch { expected: field.noise_dim(), got: law.dimension() });
    }
    let defect = law.driver_defect();
    if defect > T::lit(1e-10).max(T::epsilon() * T::lit(1024.0)) {
        return Err(DifError::DriversNotOrthonormal(defect.as_f64()));
    }
    let completion = complete_basis(law);

    let n = law.dimension();
    let t_next = state.time + dt;
    let current_value = f(state.time, &state.state);
    let mut mart = vec![T::zero(); n];
    let mut drift = T::zero();
    let mut corr = vec![T::zero(); completion.len()];
    for (i, (atom, &w)) in law.atoms().iter().zip(law.weights()).enumerate() {
        let v = f(t_next, &field.step(&state.state, dt, atom));
        let wv = w * v;
        for j in 0..n {
            mart[j] = mart[j] + wv * atom[j];
        }
        drift = drift + w * (v - current_value);
        for (c, psi) in corr.iter_mut().zip(&completion) {
            *c = *c + wv * psi[i];
        }
    }
    let sq = dt.sqrt();
    Ok(ChaosDecomposition {
        martingale_coeffs: mart.into_iter().map(|m| m / sq).collect(),
        drift_coeff: drift / dt,
        corrections: (0..completion.len()).map(CorrectionKey::Completion).zip(corr).collect(),
        dt,
        current_value,
        basis: TermBasis::Joint { law: law.clone(), completion },
    })
}

// Orthonormal functions (values at atoms) completing {1, g_1, …, g_n},
// by Gram–Schmidt over the atom indicators.
fn complete_basis<T: Real>(law: &JointLaw<T>) -> Vec<Vec<T>> {
    let w = law.weights();
    let m = law.len();
    let inner = |a: &[T], b: &[T]| -> T { (0..m).map(|i| w[i] * a[i] * b[i]).sum() };
    let mut basis: Vec<Vec<T>> = vec![vec![T::one(); m]];
    for j in 0..law.dimension() {
        basis.push(law.atoms().iter().map(|a| a[j]).collect());
    }
    let fixed = basis.len();
    for e in 0..m {
        if basis.len() == m {
            break;
        }
        let mut v: Vec<T> = (0..m).map(|i| if i == e { T::one() } else { T::zero() }).collect();
        let original = inner(&v, &v);
        for _pass in 0..2 {
            for b in &basis {
                let c = inner(&v, b);
                for (vi, &bi) in v.iter_mut().zip(b) {
                    *vi = *vi - c * bi;
                }
            }
        }
        let norm_sq = inner(&v, &v);
        if norm_sq > T::lit(1e-12) * original {
            let norm = norm_sq.sqrt();
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis.split_off(fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gram_schmidt_basis, walsh_completion, walsh_driver_vector};

    fn bernoulli() -> (IncrementLaw<f64>, OrthonormalSystem<f64>) {
        let law = IncrementLaw::symmetric_bernoulli();
        let sys = gram_schmidt_basis(&law, 2).unwrap();
        (law, sys)
    }

    #[test]
    fn linear_function_is_pure_first_chaos() {
        let (law, sys) = bernoulli();
        let d = decompose_walk_1d(|x| x, &StatePoint::origin(vec![0.0]), &law, &sys, 2).unwrap();
        assert_eq!(d.martingale_coeffs, vec![1.0]);
        assert_eq!(d.drift_coeff, 0.0);
        assert!(d.corrections.is_empty());
    }

    #[test]
    fn two_point_function() {
        let (law, sys) = bernoulli();
        let f = |x: f64| {
            if x > 0.0 {
                3.0
            } else if x < 0.0 {
                1.0
            } else {
                5.0
            }
        };
        let d = decompose_walk_1d(f, &StatePoint::origin(vec![0.0]), &law, &sys, 2).unwrap();
        assert_eq!(d.martingale_coeffs, vec![1.0]);
        assert_eq!(d.drift_part(), 2.0 - 5.0);
        for xi in [-1.0, 1.0] {
            assert_eq!(d.reconstruct(&Realization::Components(vec![xi])), f(xi) - f(0.0));
        }
    }

    #[test]
    fn error_paths() {
        let (law, sys) = bernoulli();
        let s = StatePoint::origin(vec![0.0]);
        assert_eq!(decompose_walk_1d(|x| x, &s, &law, &sys, 1), Err(DifError::TruncationTooSmall(1)));
        assert!(matches!(decompose_walk_1d(|x| x, &s, &law, &sys, 3), Err(DifError::BasisTooShort { .. })));
        let skewed = IncrementLaw::finite(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let sk = gram_schmidt_basis(&skewed, 2).unwrap();
        assert!(matches!(decompose_walk_1d(|x| x, &s, &skewed, &sk, 2), Err(DifError::NonZeroMean { .. })));
        assert!(matches!(
            decompose_walk_1d(|x| x, &StatePoint::origin(vec![0.0, 0.0]), &law, &sys, 2),
            Err(DifError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            decompose_multidim(|_, x| x[0], &s, &[law.clone(), law.clone()], &[sys.clone(), sys.clone()], 2, 1.0),
            Err(DifError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overlapping_walsh_indices_rejected() {
        let drivers = walsh_driver_vector(2);
        let field = SchemeField::walk(2);
        let s = StatePoint::origin(vec![0.0, 0.0]);
        let law = IncrementLaw::lebesgue_unit();
        let err = decompose_weak_scheme(|_, x| x[0], &s, &field, &law, &drivers, &[drivers[1]], 0.1);
        assert_eq!(err, Err(DifError::OverlappingIndices(drivers[1])));
        let err = decompose_weak_scheme(|_, x| x[0], &s, &field, &law, &drivers, &[WalshIndex::CONSTANT], 0.1);
        assert_eq!(err, Err(DifError::OverlappingIndices(WalshIndex::CONSTANT)));
    }

    #[test]
    fn walsh_completion_reconstructs_two_drivers() {
        let drivers = walsh_driver_vector(2);
        let comp = walsh_completion(&drivers);
        let field = SchemeField::constant(2, 1.0, 0.3);
        let s = StatePoint::new(1, 0.25, vec![0.4, -0.2]);
        let f = |t: f64, x: &[f64]| (x[0] * x[1] + t).exp();
        let d = decompose_weak_scheme(f, &s, &field, &IncrementLaw::lebesgue_unit(), &drivers, &comp, 0.25).unwrap();
        for k in 0..4 {
            let u = (k as f64 + 0.5) / 4.0;
            let mut y = [0.0; 2];
            crate::scheme::DriverKind::Walsh(drivers.clone()).innovation(&[u], &mut y);
            let next = field.step(&s.state, 0.25, &y);
            let truth = f(0.5, &next) - f(0.25, &s.state);
            assert!((d.reconstruct(&Realization::Unit(u)) - truth).abs() < 1e-13);
        }
    }

    #[test]
    fn joint_completion_is_orthonormal() {
        let law = IncrementLaw::<f64>::uniform_on(&[-2.0, -0.5, 0.5, 2.0]).unwrap();
        let sys = gram_schmidt_basis(&law, 4).unwrap();
        let joint = JointLaw::from_basis(&sys, 1).unwrap();
        let comp = complete_basis(&joint);
        assert_eq!(comp.len(), 2);
        let w = joint.weights();
        let atoms = joint.atoms();
        let mut all = vec![vec![1.0; 4], atoms.iter().map(|a| a[0]).collect()];
        all.extend(comp);
        for a in &all {
            for b in &all {
                let ip: f64 = (0..4).map(|i| w[i] * a[i] * b[i]).sum();
                let target = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_keys_by_degree() {
        let keys = tensor_indices(&[2, 2], 3);
        assert_eq!(keys, vec![vec![1, 1]]);
        let keys = tensor_indices(&[3, 2], 4);
        assert_eq!(keys, vec![vec![1, 1], vec![2, 0], vec![2, 1]]);
    }
}
