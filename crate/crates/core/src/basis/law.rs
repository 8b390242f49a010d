use super::quadrature::gauss_hermite_nodes;
use super::BasisError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub point: T,
    pub weight: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LawKind {
    FiniteSupport,
    LebesgueUnit,
    Gaussian,
}

/// The law `ν` of a single innovation.
#[derive(Debug, Clone, PartialEq)]
pub enum IncrementLaw<T> {
    /// Finitely many distinct atoms with positive weights summing to one.
    FiniteSupport(Vec<Atom<T>>),
    /// Lebesgue measure on `[0, 1)`.
    LebesgueUnit,
    /// Centred normal law.
    Gaussian { variance: T },
}

impl<T: Real> IncrementLaw<T> {
    pub fn finite(points: &[T], weights: &[T]) -> Result<Self, BasisError> {
        if points.len() != weights.len() {
            return Err(BasisError::LengthMismatch { points: points.len(), weights: weights.len() });
        }
        if points.is_empty() {
            return Err(BasisError::EmptySupport);
        }
        if points.iter().chain(weights).any(|v| !v.is_finite()) {
            return Err(BasisError::NonFinite);
        }
        if let Some(w) = weights.iter().find(|w| **w <= T::zero()) {
            return Err(BasisError::NonPositiveWeight(w.as_f64()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::probability_tolerance() {
            return Err(BasisError::WeightsDoNotSumToOne(total.as_f64()));
        }
        let mut sorted: Vec<T> = points.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(BasisError::DuplicateAtom(pair[0].as_f64()));
        }
        let atoms = points.iter().zip(weights).map(|(&point, &weight)| Atom { point, weight }).collect();
        Ok(IncrementLaw::FiniteSupport(atoms))
    }

    /// Equal weights on the given points.
    pub fn uniform_on(points: &[T]) -> Result<Self, BasisError> {
        let w = T::one() / T::from_count(points.len().max(1));
        Self::finite(points, &vec![w; points.len()])
    }

    /// `ν({-1}) = ν({+1}) = 1/2`.
    pub fn symmetric_bernoulli() -> Self {
        Self::uniform_on(&[-T::one(), T::one()]).expect("valid law")
    }

    /// Uniform law on `{-a, 0, a}` with `a = √(3/2)`, i.e. unit variance.
    pub fn unit_trinomial() -> Self {
        let a = T::lit(1.5).sqrt();
        Self::uniform_on(&[-a, T::zero(), a]).expect("valid law")
    }

    pub fn gaussian(variance: T) -> Result<Self, BasisError> {
        if !(variance > T::zero()) || !variance.is_finite() {
            return Err(BasisError::NonPositiveVariance(variance.as_f64()));
        }
        Ok(IncrementLaw::Gaussian { variance })
    }

    pub fn lebesgue_unit() -> Self {
        IncrementLaw::LebesgueUnit
    }

    pub fn kind(&self) -> LawKind {
        match self {
            IncrementLaw::FiniteSupport(_) => LawKind::FiniteSupport,
            IncrementLaw::LebesgueUnit => LawKind::LebesgueUnit,
            IncrementLaw::Gaussian { .. } => LawKind::Gaussian,
        }
    }

    pub fn atoms(&self) -> Option<&[Atom<T>]> {
        match self {
            IncrementLaw::FiniteSupport(a) => Some(a),
            _ => None,
        }
    }

    /// Number of support points, `None` for continuous laws.
    pub fn support_size(&self) -> Option<usize> {
        self.atoms().map(<[_]>::len)
    }

    /// Raw moment `E[ξ^k]`.
    pub fn moment(&self, k: u32) -> T {
        match self {
            IncrementLaw::FiniteSupport(atoms) => atoms.iter().map(|a| a.weight * a.point.powi(k as i32)).sum(),
            IncrementLaw::LebesgueUnit => T::one() / T::lit(f64::from(k) + 1.0),
            IncrementLaw::Gaussian { variance } => {
                if k % 2 == 1 {
                    T::zero()
                } else {
                    let double_factorial: f64 = (1..k).step_by(2).map(f64::from).product();
                    T::lit(double_factorial) * variance.powi((k / 2) as i32)
                }
            }
        }
    }

    pub fn mean(&self) -> T {
        self.moment(1)
    }

    /// Central second moment.
    pub fn variance(&self) -> T {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// Nodes and weights that integrate against `ν`: the atoms themselves for
    /// finite support (exact), the 200-node Gauss–Hermite rule for Gaussian
    /// laws. `None` for the Lebesgue law, whose integrals go through dyadic
    /// block sums instead.
    pub fn quadrature(&self) -> Option<Vec<(T, T)>> {
        match self {
            IncrementLaw::FiniteSupport(atoms) => Some(atoms.iter().map(|a| (a.point, a.weight)).collect()),
            IncrementLaw::Gaussian { variance } => {
                let scale = (T::lit(2.0) * *variance).sqrt();
                let norm = T::PI().sqrt();
                Some(gauss_hermite_nodes().iter().map(|&(x, w)| (T::lit(x) * scale, T::lit(w) / norm)).collect())
            }
            IncrementLaw::LebesgueUnit => None,
        }
    }

    /// `∫ f dν` by [`Self::quadrature`].
    pub fn expect(&self, f: impl Fn(T) -> T) -> Option<T> {
        self.quadrature().map(|q| q.into_iter().map(|(x, w)| w * f(x)).sum())
    }

    /// Inverse distribution function, used to map a uniform variate in
    /// `[0, 1)` to a sample. Finite atoms are taken in their stored order.
    pub fn quantile(&self, u: f64) -> T {
        match self {
            IncrementLaw::FiniteSupport(atoms) => {
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.weight.as_f64();
                    if u < acc {
                        return a.point;
                    }
                }
                atoms.last().expect("non-empty").point
            }
            IncrementLaw::LebesgueUnit => T::lit(u),
            IncrementLaw::Gaussian { variance } => {
                use statrs::distribution::{ContinuousCDF, Normal};
                let z = Normal::standard().inverse_cdf(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
                T::lit(z) * variance.sqrt()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(IncrementLaw::finite(&[0.0, 1.0], &[0.5, 0.6]), Err(BasisError::WeightsDoNotSumToOne(_))));
        assert!(matches!(IncrementLaw::finite(&[0.0, 1.0], &[1.0, 0.0]), Err(BasisError::NonPositiveWeight(_))));
        assert!(matches!(IncrementLaw::finite(&[1.0, 1.0], &[0.5, 0.5]), Err(BasisError::DuplicateAtom(_))));
        assert!(matches!(IncrementLaw::<f64>::finite(&[], &[]), Err(BasisError::EmptySupport)));
        assert!(IncrementLaw::gaussian(0.0f64).is_err());
    }

    #[test]
    fn moments_of_standard_laws() {
        let b = IncrementLaw::<f64>::symmetric_bernoulli();
        assert_eq!(b.mean(), 0.0);
        assert_eq!(b.variance(), 1.0);
        assert_eq!(b.moment(4), 1.0);
        let t = IncrementLaw::<f64>::unit_trinomial();
        assert!((t.variance() - 1.0).abs() < 1e-15);
        let g = IncrementLaw::gaussian(2.0f64).unwrap();
        assert_eq!(g.moment(4), 12.0);
        assert_eq!(g.moment(3), 0.0);
        assert_eq!(IncrementLaw::<f64>::LebesgueUnit.moment(2), 1.0 / 3.0);
    }

    #[test]
    fn gaussian_quadrature_matches_moments() {
        let g = IncrementLaw::gaussian(0.5f64).unwrap();
        for k in 0..10 {
            let q = g.expect(|x| x.powi(k as i32)).unwrap();
            assert!((q - g.moment(k)).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn quantile_picks_atoms_in_order() {
        let b = IncrementLaw::<f64>::symmetric_bernoulli();
        assert_eq!(b.quantile(0.1), -1.0);
        assert_eq!(b.quantile(0.5), 1.0);
        assert_eq!(b.quantile(0.999), 1.0);
        let g = IncrementLaw::gaussian(4.0f64).unwrap();
        assert!(g.quantile(0.5).abs() < 1e-12);
        assert!((g.quantile(0.8413447460685429) - 2.0).abs() < 1e-6);
    }
}
