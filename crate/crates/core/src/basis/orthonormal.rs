use super::law::{IncrementLaw, LawKind};
use super::walsh::{dyadic_digits, dyadic_integral, WalshIndex};
use super::BasisError;
use crate::scalar::Real;

/// Relative squared norm below which a Gram–Schmidt direction counts as
/// degenerate (Gram condition number beyond `1e12`).
const DEGENERATE_RELATIVE_NORM_SQ: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Finite(usize),
    Unbounded,
}

/// Orthonormal polynomials stored through the recursion that produced them:
/// `H_k = (x·H_{k-1} - Σ_{j<k} r_kj H_j) / s_k`.
#[derive(Debug, Clone, PartialEq)]
struct PolynomialFamily<T> {
    projections: Vec<Vec<T>>,
    norms: Vec<T>,
    coefficients: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Functions<T> {
    Polynomial(PolynomialFamily<T>),
    Walsh(Vec<WalshIndex>),
}

/// Ordered orthonormal functions `H_0 ≡ 1, H_1, …` of `L²(ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalSystem<T> {
    law: IncrementLaw<T>,
    functions: Functions<T>,
}

/// Orthonormal polynomials of `law` obtained by Gram–Schmidt on
/// `1, x, x², …`, `count` of them.
///
/// Each new direction is taken as `x·H_{k-1}`, which spans the same space
/// as `x^k` modulo lower degrees and keeps the recursion well conditioned;
/// it is orthogonalised twice (modified Gram–Schmidt plus one
/// reorthogonalisation pass).
pub fn gram_schmidt_basis<T: Real>(law: &IncrementLaw<T>, count: usize) -> Result<OrthonormalSystem<T>, BasisError> {
    if count == 0 {
        return Err(BasisError::ZeroCount);
    }
    if let Some(atoms) = law.support_size() {
        if count > atoms {
            return Err(BasisError::CountExceedsSupport { count, atoms });
        }
    }
    let nodes = law.quadrature().ok_or(BasisError::UnsupportedLaw(law.kind()))?;
    let inner =
        |a: &[T], b: &[T]| -> T { nodes.iter().zip(a.iter().zip(b)).map(|((_, w), (&u, &v))| *w * u * v).sum() };

    // values[k][i] = H_k(node_i)
    let mut values: Vec<Vec<T>> = vec![vec![T::one(); nodes.len()]];
    let mut coefficients: Vec<Vec<T>> = vec![vec![T::one()]];
    let mut projections: Vec<Vec<T>> = vec![Vec::new()];
    let mut norms: Vec<T> = vec![T::one()];

    for degree in 1..count {
        let prev = &values[degree - 1];
        let mut v: Vec<T> = nodes.iter().zip(prev).map(|((x, _), &h)| *x * h).collect();
        let original = inner(&v, &v);
        let mut r = vec![T::zero(); degree];
        for _pass in 0..2 {
            for (j, hj) in values.iter().enumerate() {
                let c = inner(&v, hj);
                r[j] = r[j] + c;
                for (vi, &h) in v.iter_mut().zip(hj) {
                    *vi = *vi - c * h;
                }
            }
        }
        let norm_sq = inner(&v, &v);
        if !(norm_sq > T::lit(DEGENERATE_RELATIVE_NORM_SQ) * original) {
            return Err(BasisError::DegenerateMoments { degree });
        }
        let norm = norm_sq.sqrt();
        for vi in v.iter_mut() {
            *vi = *vi / norm;
        }
        // Monomial coefficients: shift H_{k-1}, subtract projections, scale.
        let mut coeff = vec![T::zero(); degree + 1];
        for (i, &c) in coefficients[degree - 1].iter().enumerate() {
            coeff[i + 1] = c;
        }
        for (j, &rj) in r.iter().enumerate() {
            for (i, &c) in coefficients[j].iter().enumerate() {
                coeff[i] = coeff[i] - rj * c;
            }
        }
        for c in coeff.iter_mut() {
            *c = *c / norm;
        }
        values.push(v);
        coefficients.push(coeff);
        projections.push(r);
        norms.push(norm);
    }

    Ok(OrthonormalSystem {
        law: law.clone(),
        functions: Functions::Polynomial(PolynomialFamily { projections, norms, coefficients }),
    })
}

impl<T: Real> OrthonormalSystem<T> {
    /// Walsh system over the Lebesgue law on `[0, 1)`: the constant followed
    /// by `indices` (a leading constant in `indices` is not duplicated).
    pub fn walsh(indices: &[WalshIndex]) -> Self {
        let mut all = vec![WalshIndex::CONSTANT];
        all.extend(indices.iter().copied().filter(|w| !w.is_constant()));
        OrthonormalSystem { law: IncrementLaw::LebesgueUnit, functions: Functions::Walsh(all) }
    }

    pub fn law(&self) -> &IncrementLaw<T> {
        &self.law
    }

    pub fn len(&self) -> usize {
        match &self.functions {
            Functions::Polynomial(p) => p.norms.len(),
            Functions::Walsh(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension of `L²(ν)` this system lives in.
    pub fn cardinality(&self) -> Cardinality {
        match self.law.support_size() {
            Some(n) => Cardinality::Finite(n),
            None => Cardinality::Unbounded,
        }
    }

    /// True when the functions span all of `L²(ν)`.
    pub fn is_complete(&self) -> bool {
        self.cardinality() == Cardinality::Finite(self.len())
    }

    /// Walsh indices, for systems built by [`Self::walsh`].
    pub fn walsh_indices(&self) -> Option<&[WalshIndex]> {
        match &self.functions {
            Functions::Walsh(w) => Some(w),
            Functions::Polynomial(_) => None,
        }
    }

    /// Monomial coefficients of `H_k` (lowest degree first), for polynomial
    /// systems.
    pub fn coefficients(&self, k: usize) -> Option<&[T]> {
        match &self.functions {
            Functions::Polynomial(p) => p.coefficients.get(k).map(Vec::as_slice),
            Functions::Walsh(_) => None,
        }
    }

    /// `H_0(x), …, H_{len-1}(x)`. For Walsh systems `x` must lie in `[0, 1)`.
    pub fn eval_all(&self, x: T) -> Vec<T> {
        match &self.functions {
            Functions::Polynomial(p) => {
                let mut out: Vec<T> = Vec::with_capacity(p.norms.len());
                out.push(T::one());
                for k in 1..p.norms.len() {
                    let mut v = x * out[k - 1];
                    for (j, &r) in p.projections[k].iter().enumerate() {
                        v = v - r * out[j];
                    }
                    out.push(v / p.norms[k]);
                }
                out
            }
            Functions::Walsh(w) => {
                let digits = dyadic_digits(x).expect("Walsh systems are evaluated on [0, 1)");
                w.iter().map(|i| i.value_at_digits(digits)).collect()
            }
        }
    }

    pub fn eval(&self, k: usize, x: T) -> T {
        match &self.functions {
            Functions::Walsh(w) => {
                let digits = dyadic_digits(x).expect("Walsh systems are evaluated on [0, 1)");
                w[k].value_at_digits(digits)
            }
            Functions::Polynomial(_) => self.eval_all(x)[k],
        }
    }

    /// `⟨H_i, H_j⟩` in `L²(ν)`: exact summation over atoms, Gauss–Hermite for
    /// Gaussian laws, dyadic block summation for Walsh systems.
    pub fn inner_product(&self, i: usize, j: usize) -> T {
        self.gram_matrix(i.max(j) + 1)[i][j]
    }

    /// Gram matrix of the first `k` functions.
    pub fn gram_matrix(&self, k: usize) -> Vec<Vec<T>> {
        let k = k.min(self.len());
        match &self.functions {
            Functions::Walsh(w) => {
                let res = w[..k].iter().map(|i| i.max_factor()).max().unwrap_or(0);
                (0..k)
                    .map(|a| {
                        (0..k)
                            .map(|b| {
                                dyadic_integral(res, |d| w[a].value_at_digits::<T>(d) * w[b].value_at_digits::<T>(d))
                            })
                            .collect()
                    })
                    .collect()
            }
            Functions::Polynomial(_) => {
                let nodes = self.law.quadrature().expect("polynomial systems have quadrature");
                let evals: Vec<Vec<T>> = nodes.iter().map(|(x, _)| self.eval_all(*x)).collect();
                (0..k)
                    .map(|a| {
                        (0..k).map(|b| nodes.iter().zip(&evals).map(|((_, w), h)| *w * h[a] * h[b]).sum()).collect()
                    })
                    .collect()
            }
        }
    }

    pub fn law_kind(&self) -> LawKind {
        self.law.kind()
    }
}
