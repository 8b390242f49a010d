//! Rademacher functions and the Walsh system on `[0, 1)`.
//!
//! A point `x ∈ [0, 1)` is represented by its binary digits packed into a
//! `u64`, bit `n - 1` holding the `n`-th digit. A Walsh function is a set of
//! Rademacher indices packed the same way, so evaluation is a parity count.

use std::collections::HashSet;
use std::fmt;

use super::BasisError;
use crate::scalar::Real;

/// Largest Rademacher index evaluable on an `f64` in `[0, 1)`.
pub const MAX_DYADIC_RESOLUTION: u32 = 52;

/// Finite set of Rademacher indices; the Walsh function is their product.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct WalshIndex(u64);

impl WalshIndex {
    pub const CONSTANT: WalshIndex = WalshIndex(0);

    pub fn new(factors: &[u32]) -> Result<Self, BasisError> {
        let mut mask = 0u64;
        for &n in factors {
            if n == 0 {
                return Err(BasisError::ZeroFactor);
            }
            if n > MAX_DYADIC_RESOLUTION {
                return Err(BasisError::ResolutionExceeded(n));
            }
            mask |= 1 << (n - 1);
        }
        Ok(WalshIndex(mask))
    }

    pub fn rademacher(n: u32) -> Result<Self, BasisError> {
        Self::new(&[n])
    }

    /// Bit `n - 1` set iff `τ_n` is a factor.
    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn from_mask(mask: u64) -> Result<Self, BasisError> {
        let top = 64 - mask.leading_zeros();
        if top > MAX_DYADIC_RESOLUTION {
            return Err(BasisError::ResolutionExceeded(top));
        }
        Ok(WalshIndex(mask))
    }

    /// Sorted factor list.
    pub fn factors(self) -> Vec<u32> {
        (0..64).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    pub fn cardinality(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_odd(self) -> bool {
        self.cardinality() % 2 == 1
    }

    pub fn is_constant(self) -> bool {
        self.0 == 0
    }

    /// Largest factor, `0` for the constant function. This is the dyadic
    /// resolution at which the function is piecewise constant.
    pub fn max_factor(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    /// Index of the pointwise product.
    pub fn product(self, other: WalshIndex) -> WalshIndex {
        WalshIndex(self.0 ^ other.0)
    }

    /// Value at a point given by its packed binary digits.
    #[inline]
    pub fn sign_at_digits(self, digits: u64) -> i8 {
        if (self.0 & digits).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn value_at_digits<T: Real>(self, digits: u64) -> T {
        if (self.0 & digits).count_ones().is_multiple_of(2) {
            T::one()
        } else {
            -T::one()
        }
    }
}

impl fmt::Debug for WalshIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for WalshIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors().iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Binary digits of `x ∈ [0, 1)`, digit `n` in bit `n - 1`.
pub fn dyadic_digits<T: Real>(x: T) -> Result<u64, BasisError> {
    let x = x.as_f64();
    if !(0.0..1.0).contains(&x) {
        return Err(BasisError::OutOfUnitInterval(x));
    }
    // Exact: scaling by a power of two and truncating an f64 below 2^52.
    let scaled = (x * (1u64 << MAX_DYADIC_RESOLUTION) as f64) as u64;
    Ok(scaled.reverse_bits() >> (64 - MAX_DYADIC_RESOLUTION))
}

/// Packed digits of the dyadic block `[k/2^m, (k+1)/2^m)`.
#[inline]
pub fn dyadic_block_digits(resolution: u32, block: u64) -> u64 {
    if resolution == 0 {
        0
    } else {
        block.reverse_bits() >> (64 - resolution)
    }
}

/// `τ_n(x)`: `+1` iff `⌊2^n x⌋` is even.
pub fn rademacher<T: Real>(n: u32, x: T) -> Result<i8, BasisError> {
    let index = WalshIndex::rademacher(n)?;
    Ok(index.sign_at_digits(dyadic_digits(x)?))
}

pub fn walsh_eval<T: Real>(index: WalshIndex, x: T) -> Result<i8, BasisError> {
    Ok(index.sign_at_digits(dyadic_digits(x)?))
}

/// Exact integral over `[0, 1)` of a function that is constant on the dyadic
/// blocks of width `2^-resolution`; `f` receives each block's packed digits.
pub fn dyadic_integral<T: Real>(resolution: u32, mut f: impl FnMut(u64) -> T) -> T {
    let blocks = 1u64 << resolution;
    let mut acc = Vec::with_capacity(blocks as usize);
    for k in 0..blocks {
        acc.push(f(dyadic_block_digits(resolution, k)));
    }
    crate::scalar::pairwise_sum(&acc) / T::lit(blocks as f64)
}

// Printed prefix of the odd-length driver list.
const DRIVER_PREFIX: [&[u32]; 9] = [&[1], &[2], &[3], &[1, 2, 3], &[4], &[5], &[1, 2, 4], &[1, 2, 5], &[1, 2, 3, 4, 5]];

/// The first `n` odd-cardinality Walsh indices used as drivers.
///
/// The first nine follow the fixed prefix
/// `τ1, τ2, τ3, τ1τ2τ3, τ4, τ5, τ1τ2τ4, τ1τ2τ5, τ1τ2τ3τ4τ5`; after that, the
/// remaining odd subsets are taken ordered by largest factor, then by
/// cardinality, then lexicographically.
pub fn walsh_driver_vector(n: usize) -> Vec<WalshIndex> {
    let mut out: Vec<WalshIndex> =
        DRIVER_PREFIX.iter().take(n).map(|f| WalshIndex::new(f).expect("prefix factors are small")).collect();
    if out.len() == n {
        return out;
    }
    let taken: HashSet<WalshIndex> = out.iter().copied().collect();
    'outer: for max in 1..=MAX_DYADIC_RESOLUTION {
        for card in (1..=max).step_by(2) {
            for mut combo in combinations(max - 1, card - 1) {
                combo.push(max);
                let index = WalshIndex::new(&combo).expect("within resolution");
                if taken.contains(&index) {
                    continue;
                }
                out.push(index);
                if out.len() == n {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// Every non-constant Walsh index at the drivers' resolution that is not a
/// driver. Together with the constant and the drivers this spans all
/// functions constant on the dyadic blocks of that resolution.
pub fn walsh_completion(drivers: &[WalshIndex]) -> Vec<WalshIndex> {
    let resolution = drivers.iter().map(|d| d.max_factor()).max().unwrap_or(0);
    let taken: HashSet<WalshIndex> = drivers.iter().copied().collect();
    (1..(1u64 << resolution)).map(WalshIndex).filter(|w| !taken.contains(w)).collect()
}

// k-subsets of {1..=n} in lexicographic order.
fn combinations(n: u32, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k as usize);
    fn rec(start: u32, n: u32, k: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() as u32 == k {
            out.push(current.clone());
            return;
        }
        for v in start..=n {
            current.push(v);
            rec(v + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(1, n, k, &mut current, &mut out);
    out
}
