use std::fmt;

use crate::scalar::Real;
use crate::scheme::{DriverKind, Outcome, SchemeField, StateMap};

use super::lattice::{Lattice, LatticeOptions};
use super::FdError;

/// Highest total degree accepted for consistency test functions.
pub const MAX_TEST_DEGREE: u32 = 6;

/// A polynomial in `n` variables, `Σ c_α x^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    dimension: usize,
    terms: Vec<(Vec<u32>, T)>,
}

impl<T: Real> Polynomial<T> {
    /// Rejects terms of total degree above 6, exponent vectors of the wrong
    /// length and non-finite coefficients.
    pub fn new(dimension: usize, terms: Vec<(Vec<u32>, T)>) -> Result<Self, FdError> {
        for (alpha, c) in &terms {
            if alpha.len() != dimension {
                return Err(FdError::UnsupportedTestFunction(format!(
                    "exponent vector of length {} in dimension {dimension}",
                    alpha.len()
                )));
            }
            let degree: u32 = alpha.iter().sum();
            if degree > MAX_TEST_DEGREE {
                return Err(FdError::UnsupportedTestFunction(format!("total degree {degree} exceeds 6")));
            }
            if !c.is_finite() {
                return Err(FdError::UnsupportedTestFunction("non-finite coefficient".into()));
            }
        }
        Ok(Polynomial { dimension, terms })
    }

    /// `Σ_k c_k x^k` in one variable.
    pub fn univariate(coefficients: &[T]) -> Result<Self, FdError> {
        Self::new(1, coefficients.iter().enumerate().map(|(k, &c)| (vec![k as u32], c)).collect())
    }

    pub fn constant(dimension: usize, c: T) -> Self {
        Polynomial { dimension, terms: vec![(vec![0; dimension], c)] }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().map(|(alpha, c)| *c * monomial(alpha, x)).sum()
    }

    /// `∂_i`.
    pub fn partial(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(a, _)| a[i] > 0)
            .map(|(a, c)| {
                let mut b = a.clone();
                b[i] -= 1;
                (b, *c * T::lit(f64::from(a[i])))
            })
            .collect();
        Polynomial { dimension: self.dimension, terms }
    }
}

impl<T: Real> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| {
                let vars: Vec<String> = a
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn monomial<T: Real>(alpha: &[u32], x: &[T]) -> T {
    alpha.iter().zip(x).fold(T::one(), |acc, (&e, &xi)| acc * xi.powi(e as i32))
}

/// `L^N u(x) = N Σ_i {u(x + F(x, 1/N, y_i)) - u(x)} ν(y_i)`, with the sum over
/// atoms of a finite law or over the dyadic blocks of a Walsh driver.
#[derive(Debug, Clone)]
pub struct DiscreteGenerator<T> {
    steps_per_unit: usize,
    field: SchemeField<T>,
    kind: DriverKind<T>,
    outcomes: Vec<Outcome<T>>,
}

impl<T: Real> DiscreteGenerator<T> {
    pub fn new(field: SchemeField<T>, kind: DriverKind<T>, steps_per_unit: usize) -> Result<Self, FdError> {
        if steps_per_unit == 0 {
            return Err(FdError::Scheme(crate::scheme::SchemeError::ZeroSteps));
        }
        if kind.noise_dim() != field.noise_dim() {
            return Err(FdError::DimensionMismatch { expected: field.noise_dim(), got: kind.noise_dim() });
        }
        let outcomes = kind.outcomes()?;
        Ok(DiscreteGenerator { steps_per_unit, field, kind, outcomes })
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn dt(&self) -> T {
        T::one() / T::from_count(self.steps_per_unit)
    }

    pub fn field(&self) -> &SchemeField<T> {
        &self.field
    }

    pub fn driver(&self) -> &DriverKind<T> {
        &self.kind
    }

    /// `L^N u(x)`.
    pub fn apply(&self, u: impl Fn(&[T]) -> T, x: &[T]) -> T {
        let dt = self.dt();
        let ux = u(x);
        let mut next = vec![T::zero(); x.len()];
        let mut inc = vec![T::zero(); x.len()];
        let mut scratch = Vec::new();
        let mut acc = T::zero();
        for o in &self.outcomes {
            self.field.increment_into(x, dt, &o.innovation, &mut inc, &mut scratch);
            for d in 0..x.len() {
                next[d] = x[d] + inc[d];
            }
            acc = acc + o.probability * (u(&next) - ux);
        }
        acc / dt
    }

    /// `∂^N_t u(t, x) = N {u(t + 1/N, x) - u(t, x)}`.
    pub fn time_difference(&self, u: impl Fn(T, &[T]) -> T, t: T, x: &[T]) -> T {
        (u(t + self.dt(), x) - u(t, x)) / self.dt()
    }

    /// `(∂^N_t + L^N) u(t, x)`, with `L^N` acting on `u(t + 1/N, ·)`.
    pub fn apply_parabolic(&self, u: impl Fn(T, &[T]) -> T, t: T, x: &[T]) -> T {
        let t1 = t + self.dt();
        self.time_difference(&u, t, x) + self.apply(|y| u(t1, y), x)
    }
}

/// `L φ = ½ Σ (σσᵀ)_{ij} ∂_i∂_j φ + Σ μ_i ∂_i φ` with `σ(x)` square and
/// row-major.
#[derive(Clone)]
pub struct ContinuousGenerator<T> {
    dimension: usize,
    sigma: StateMap<T>,
    mu: StateMap<T>,
}

impl<T> fmt::Debug for ContinuousGenerator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousGenerator").field("dimension", &self.dimension).finish_non_exhaustive()
    }
}

impl<T: Real> ContinuousGenerator<T> {
    pub fn new(
        dimension: usize,
        sigma: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
        mu: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        ContinuousGenerator { dimension, sigma: std::sync::Arc::new(sigma), mu: std::sync::Arc::new(mu) }
    }

    /// The diffusion an Euler–Maruyama field discretizes.
    pub fn from_field(field: &SchemeField<T>) -> Option<Self> {
        if !field.is_euler_maruyama() {
            return None;
        }
        let (fs, fm) = (field.clone(), field.clone());
        Some(Self::new(
            field.dimension(),
            move |x, out| out.copy_from_slice(&fs.sigma_matrix(x).expect("Euler–Maruyama field")),
            move |x, out| out.copy_from_slice(&fm.drift(x).expect("Euler–Maruyama field")),
        ))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn apply(&self, phi: &Polynomial<T>, x: &[T]) -> T {
        let n = self.dimension;
        let mut s = vec![T::zero(); n * n];
        (self.sigma)(x, &mut s);
        let mut m = vec![T::zero(); n];
        (self.mu)(x, &mut m);
        let mut acc = T::zero();
        for i in 0..n {
            let di = phi.partial(i);
            acc = acc + m[i] * di.eval(x);
            for j in 0..n {
                let a: T = (0..n).map(|k| s[i * n + k] * s[j * n + k]).sum();
                if a != T::zero() {
                    acc = acc + T::lit(0.5) * a * di.partial(j).eval(x);
                }
            }
        }
        acc
    }
}

/// `|L^N φ(x) - L φ(x)|`.
pub fn consistency_defect<T: Real>(
    discrete: &DiscreteGenerator<T>,
    continuous: &ContinuousGenerator<T>,
    phi: &Polynomial<T>,
    x: &[T],
) -> Result<T, FdError> {
    let n = discrete.field().dimension();
    if continuous.dimension() != n || phi.dimension() != n || x.len() != n {
        return Err(FdError::DimensionMismatch { expected: n, got: x.len().min(phi.dimension()) });
    }
    Ok((discrete.apply(|y| phi.eval(y), x) - continuous.apply(phi, x)).abs())
}

/// `Σ_k Δt E|L^N φ(X_{t_k}) - L φ(X_{t_k})|` over `k < N`, the grid form of
/// the consistency defect, with the expectation over the scheme lattice from
/// `x0` on `[0, horizon]`.
pub fn integrated_consistency_defect<T: Real>(
    discrete: &DiscreteGenerator<T>,
    continuous: &ContinuousGenerator<T>,
    phi: &Polynomial<T>,
    x0: &[T],
    horizon: T,
    options: LatticeOptions,
) -> Result<T, FdError> {
    let steps = (horizon * T::from_count(discrete.steps_per_unit())).round().to_usize().unwrap_or(0);
    let lattice = Lattice::build(discrete.field(), discrete.driver(), x0, steps, horizon, options)?;
    let mut weight = vec![T::one()];
    let mut total = T::zero();
    for k in 0..steps {
        let dt = lattice.dt(k);
        for (i, &w) in weight.iter().enumerate() {
            total = total + dt * w * consistency_defect(discrete, continuous, phi, lattice.state(k, i))?;
        }
        let mut next = vec![T::zero(); lattice.level_len(k + 1)];
        for (i, &w) in weight.iter().enumerate() {
            for (&c, &p) in lattice.children(k, i).iter().zip(lattice.probabilities()) {
                next[c as usize] = next[c as usize] + w * p;
            }
        }
        weight = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::IncrementLaw;

    fn bernoulli_em(n: usize) -> DiscreteGenerator<f64> {
        DiscreteGenerator::new(
            SchemeField::constant(1, 1.0, 0.0),
            DriverKind::Product(vec![IncrementLaw::symmetric_bernoulli()]),
            n,
        )
        .unwrap()
    }

    fn brownian() -> ContinuousGenerator<f64> {
        ContinuousGenerator::new(1, |_, s| s[0] = 1.0, |_, m| m[0] = 0.0)
    }

    #[test]
    fn polynomial_calculus() {
        let p = Polynomial::new(2, vec![(vec![2, 1], 3.0), (vec![0, 3], -1.0), (vec![0, 0], 2.0)]).unwrap();
        assert_eq!(p.eval(&[2.0, -1.0]), -(3.0 * 4.0) + 1.0 + 2.0);
        assert_eq!(p.partial(0).eval(&[2.0, -1.0]), -(6.0 * 2.0));
        assert_eq!(p.partial(1).partial(1).eval(&[2.0, -1.0]), -6.0 * -1.0);
        assert_eq!(p.degree(), 3);
        assert!(Polynomial::<f64>::univariate(&[0.0; 8]).is_err());
        assert!(matches!(Polynomial::new(1, vec![(vec![1, 1], 1.0)]), Err(FdError::UnsupportedTestFunction(_))));
    }

    #[test]
    fn generator_annihilates_constants_and_is_linear() {
        let g = DiscreteGenerator::new(
            SchemeField::euler_maruyama_diagonal(
                1,
                |x: &[f64], s: &mut [f64]| s[0] = 1.0 + x[0].abs(),
                |x: &[f64], m: &mut [f64]| m[0] = x[0].sin(),
            ),
            DriverKind::Product(vec![IncrementLaw::unit_trinomial()]),
            37,
        )
        .unwrap();
        assert_eq!(g.apply(|_| 4.2, &[0.3]), 0.0);
        let (u, v) = (|x: &[f64]| x[0].exp(), |x: &[f64]| x[0].powi(3));
        let lhs = g.apply(|x| 2.0 * u(x) - 3.0 * v(x), &[0.3]);
        let rhs = 2.0 * g.apply(u, &[0.3]) - 3.0 * g.apply(v, &[0.3]);
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn quadratics_are_consistent() {
        let x2 = Polynomial::univariate(&[0.0, 0.0, 1.0]).unwrap();
        for n in [1, 7, 100] {
            assert!(consistency_defect(&bernoulli_em(n), &brownian(), &x2, &[0.4]).unwrap() <= 1e-10);
        }
        let one = Polynomial::constant(1, 1.0);
        assert_eq!(consistency_defect(&bernoulli_em(3), &brownian(), &one, &[0.4]).unwrap(), 0.0);
    }

    #[test]
    fn quartic_defect_against_moment_expansion() {
        // N E[(x + ξ/√N)^4 - x^4] - 6x² expanded with E ξ^k of the law.
        let law = IncrementLaw::<f64>::symmetric_bernoulli();
        let phi = Polynomial::univariate(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let x: f64 = 0.7;
        for n in [10usize, 100, 1000] {
            let h = 1.0 / (n as f64).sqrt();
            let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
            let expansion: f64 =
                (1..=4).map(|k| binom[k] * x.powi(4 - k as i32) * h.powi(k as i32) * law.moment(k as u32)).sum();
            let oracle = (n as f64 * expansion - 6.0 * x * x).abs();
            let got = consistency_defect(&bernoulli_em(n), &brownian(), &phi, &[x]).unwrap();
            assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        }
    }

    #[test]
    fn continuous_generator_from_field() {
        let field = SchemeField::euler_maruyama(
            2,
            |x: &[f64], s: &mut [f64]| s.copy_from_slice(&[1.0, x[0], 0.0, 2.0]),
            |x: &[f64], m: &mut [f64]| m.copy_from_slice(&[x[1], 0.0]),
        );
        let l = ContinuousGenerator::from_field(&field).unwrap();
        // φ = x1·x2: ∂1 = x2, ∂2 = x1, ∂12 = 1; (σσᵀ)_12 = 2x1.
        let phi = Polynomial::new(2, vec![(vec![1, 1], 1.0)]).unwrap();
        let x = [0.5, 3.0];
        assert!((l.apply(&phi, &x) - (x[1] * x[1] + 0.5 * 2.0 * (2.0 * x[0]))).abs() < 1e-14);
        assert!(ContinuousGenerator::from_field(&SchemeField::<f64>::walk(1)).is_none());
    }

    #[test]
    fn integrated_defect_is_time_weighted() {
        let phi = Polynomial::univariate(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        // Pointwise defect is 1/N everywhere; integral over [0, 2] is 2/N.
        let got =
            integrated_consistency_defect(&bernoulli_em(8), &brownian(), &phi, &[0.0], 2.0, LatticeOptions::default())
                .unwrap();
        assert!((got - 2.0 / 8.0).abs() < 1e-12);
    }
}
