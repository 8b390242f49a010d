use crate::basis::{dyadic_block_digits, dyadic_digits, IncrementLaw, LawKind, OrthonormalSystem, WalshIndex};
use crate::scalar::Real;

use super::sampler::Sampler;
use super::SchemeError;

/// Largest dyadic resolution enumerated block by block.
pub const MAX_ENUMERATED_RESOLUTION: u32 = 24;

/// Finitely supported law on `R^n` given by vector atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLaw<T> {
    atoms: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Real> JointLaw<T> {
    pub fn new(atoms: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self, SchemeError> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(SchemeError::InvalidLaw("atoms and weights must be non-empty and of equal length".into()));
        }
        let dim = atoms[0].len();
        if dim == 0 || atoms.iter().any(|a| a.len() != dim) {
            return Err(SchemeError::InvalidLaw("atoms must share a positive dimension".into()));
        }
        if atoms.iter().flatten().chain(&weights).any(|v| !v.is_finite()) {
            return Err(SchemeError::InvalidLaw("non-finite atom or weight".into()));
        }
        if weights.iter().any(|w| *w <= T::zero()) {
            return Err(SchemeError::InvalidLaw("weights must be positive".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::probability_tolerance() {
            return Err(SchemeError::InvalidLaw(format!("weights sum to {total}")));
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if atoms[i] == atoms[j] {
                    return Err(SchemeError::InvalidLaw(format!("atom {i} repeats atom {j}")));
                }
            }
        }
        Ok(JointLaw { atoms, weights })
    }

    /// Product of independent finite scalar laws; atoms in mixed-radix order
    /// with the last component varying fastest.
    pub fn product(laws: &[IncrementLaw<T>]) -> Result<Self, SchemeError> {
        let mut atoms: Vec<Vec<T>> = vec![Vec::new()];
        let mut weights = vec![T::one()];
        for law in laws {
            let support = law.atoms().ok_or(SchemeError::NotEnumerable(law.kind()))?;
            let mut next_atoms = Vec::with_capacity(atoms.len() * support.len());
            let mut next_weights = Vec::with_capacity(atoms.len() * support.len());
            for (a, &w) in atoms.iter().zip(&weights) {
                for s in support {
                    let mut v = a.clone();
                    v.push(s.point);
                    next_atoms.push(v);
                    next_weights.push(w * s.weight);
                }
            }
            atoms = next_atoms;
            weights = next_weights;
        }
        Self::new(atoms, weights)
    }

    /// Atoms `(H_1(g), …, H_n(g))` for `g` in the support of the system's law.
    pub fn from_basis(system: &OrthonormalSystem<T>, drivers: usize) -> Result<Self, SchemeError> {
        let support = system.law().atoms().ok_or(SchemeError::NotEnumerable(system.law_kind()))?;
        if drivers == 0 || drivers >= system.len() {
            return Err(SchemeError::InvalidLaw(format!(
                "need 1..{} drivers from a system of {} functions",
                system.len() - 1,
                system.len()
            )));
        }
        let atoms = support.iter().map(|a| system.eval_all(a.point)[1..=drivers].to_vec()).collect();
        Self::new(atoms, support.iter().map(|a| a.weight).collect())
    }

    /// Three equally weighted atoms `√2 (cos θ_i, sin θ_i)`, `θ_i = π/2 + 2πi/3`:
    /// mean zero, identity covariance in `R²`.
    pub fn triangle() -> Self {
        let r = T::SQRT_2();
        let third = T::one() / T::lit(3.0);
        let atoms = (0..3)
            .map(|i| {
                let theta = T::FRAC_PI_2() + T::lit(2.0) * T::PI() * T::from_count(i) * third;
                vec![r * theta.cos(), r * theta.sin()]
            })
            .collect();
        Self::new(atoms, vec![third; 3]).expect("valid design")
    }

    pub fn dimension(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<T>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn mean(&self) -> Vec<T> {
        let n = self.dimension();
        (0..n).map(|i| self.atoms.iter().zip(&self.weights).map(|(a, &w)| w * a[i]).sum()).collect()
    }

    /// Row-major second moment matrix `E[y yᵀ]`.
    pub fn second_moments(&self) -> Vec<T> {
        let n = self.dimension();
        let mut out = vec![T::zero(); n * n];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = out[i * n + j] + w * a[i] * a[j];
                }
            }
        }
        out
    }

    /// `E[y_i y_j y_k]` flattened as `(i·n + j)·n + k`.
    pub fn third_moments(&self) -> Vec<T> {
        let n = self.dimension();
        let mut out = vec![T::zero(); n * n * n];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let idx = (i * n + j) * n + k;
                        out[idx] = out[idx] + w * a[i] * a[j] * a[k];
                    }
                }
            }
        }
        out
    }

    /// `max(|E[y]|_∞, |E[y yᵀ] - I|_∞)`: zero when the coordinates are
    /// mean-zero and orthonormal in `L²`.
    pub fn driver_defect(&self) -> T {
        let n = self.dimension();
        let mean = self.mean().into_iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let second = self.second_moments();
        let mut cov = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { T::one() } else { T::zero() };
                cov = cov.max((second[i * n + j] - target).abs());
            }
        }
        mean.max(cov)
    }

    /// Atom chosen by inverse CDF over the stored order.
    pub fn atom_for_uniform(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w.as_f64();
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }
}

/// Where the per-step innovation `y` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DriverKind<T> {
    /// Independent coordinates, each with its own law (finite or Gaussian).
    Product(Vec<IncrementLaw<T>>),
    /// One vector atom per step.
    Joint(JointLaw<T>),
    /// `y = (H_1(ξ), …, H_n(ξ))` for a single `ξ` uniform on `[0, 1)`.
    Walsh(Vec<WalshIndex>),
}

/// One enumerated innovation with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub probability: T,
    pub innovation: Vec<T>,
}

impl<T: Real> DriverKind<T> {
    /// Gaussian innovations with identity covariance in `R^n`.
    pub fn gaussian(dimension: usize) -> Self {
        DriverKind::Product(vec![IncrementLaw::Gaussian { variance: T::one() }; dimension])
    }

    pub fn noise_dim(&self) -> usize {
        match self {
            DriverKind::Product(laws) => laws.len(),
            DriverKind::Joint(law) => law.dimension(),
            DriverKind::Walsh(drivers) => drivers.len(),
        }
    }

    /// Uniform variates consumed per time step.
    pub fn uniforms_per_step(&self) -> usize {
        match self {
            DriverKind::Product(laws) => laws.len(),
            DriverKind::Joint(_) | DriverKind::Walsh(_) => 1,
        }
    }

    /// Dyadic resolution of a Walsh driver vector.
    pub fn walsh_resolution(&self) -> Option<u32> {
        match self {
            DriverKind::Walsh(d) => Some(d.iter().map(|w| w.max_factor()).max().unwrap_or(0)),
            _ => None,
        }
    }

    /// Maps the uniforms of one step to the innovation `y`.
    pub fn innovation(&self, uniforms: &[f64], out: &mut [T]) {
        match self {
            DriverKind::Product(laws) => {
                for ((o, law), &u) in out.iter_mut().zip(laws).zip(uniforms) {
                    *o = law.quantile(u);
                }
            }
            DriverKind::Joint(law) => out.copy_from_slice(&law.atoms[law.atom_for_uniform(uniforms[0])]),
            DriverKind::Walsh(drivers) => {
                let digits = dyadic_digits(uniforms[0]).expect("uniforms lie in [0, 1)");
                for (o, w) in out.iter_mut().zip(drivers) {
                    *o = w.value_at_digits(digits);
                }
            }
        }
    }

    /// Number of distinct one-step outcomes, `None` when not enumerable.
    pub fn outcome_count(&self) -> Option<u128> {
        match self {
            DriverKind::Product(laws) => {
                laws.iter().try_fold(1u128, |acc, l| l.support_size().map(|s| acc.saturating_mul(s as u128)))
            }
            DriverKind::Joint(law) => Some(law.len() as u128),
            DriverKind::Walsh(_) => self.walsh_resolution().map(|r| 1u128 << r),
        }
    }

    /// Every one-step innovation with its probability (exact dyadic blocks
    /// for Walsh drivers).
    pub fn outcomes(&self) -> Result<Vec<Outcome<T>>, SchemeError> {
        match self {
            DriverKind::Product(laws) => {
                if let Some(l) = laws.iter().find(|l| l.kind() != LawKind::FiniteSupport) {
                    return Err(SchemeError::NotEnumerable(l.kind()));
                }
                let joint = JointLaw::product(laws)?;
                Ok(joint_outcomes(&joint))
            }
            DriverKind::Joint(law) => Ok(joint_outcomes(law)),
            DriverKind::Walsh(drivers) => {
                let res = self.walsh_resolution().unwrap_or(0);
                if res > MAX_ENUMERATED_RESOLUTION {
                    return Err(SchemeError::ResolutionTooFine(res));
                }
                let blocks = 1u64 << res;
                let p = T::one() / T::lit(blocks as f64);
                Ok((0..blocks)
                    .map(|k| {
                        let digits = dyadic_block_digits(res, k);
                        Outcome {
                            probability: p,
                            innovation: drivers.iter().map(|w| w.value_at_digits(digits)).collect(),
                        }
                    })
                    .collect())
            }
        }
    }
}

fn joint_outcomes<T: Real>(law: &JointLaw<T>) -> Vec<Outcome<T>> {
    law.atoms.iter().zip(&law.weights).map(|(a, &w)| Outcome { probability: w, innovation: a.clone() }).collect()
}

/// A driver kind together with the uniform sampler feeding it.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverSource<T> {
    pub kind: DriverKind<T>,
    pub sampler: Sampler,
}

impl<T: Real> DriverSource<T> {
    pub fn new(kind: DriverKind<T>, sampler: Sampler) -> Self {
        DriverSource { kind, sampler }
    }
}
