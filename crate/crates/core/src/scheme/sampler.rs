//! Uniform point sources: per-path pseudo-random streams and randomized
//! low-discrepancy sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobol_burley::parts::{hash, owen_scramble_rev, sobol_rev};

use super::SchemeError;

/// Dimensions available from the Sobol generator.
pub const SOBOL_MAX_DIMENSION: usize = sobol_burley::NUM_DIMENSIONS as usize;
/// Points per scrambled Sobol sequence.
pub const SOBOL_MAX_POINTS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QmcKind {
    /// Owen-scrambled Sobol (base 2). Default.
    #[default]
    Sobol,
    /// Halton with a Cranley–Patterson random shift.
    Halton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sampler {
    PseudoRandom { seed: u64 },
    LowDiscrepancy { seed: u64, kind: QmcKind },
}

impl Sampler {
    pub fn seed(&self) -> u64 {
        match *self {
            Sampler::PseudoRandom { seed } | Sampler::LowDiscrepancy { seed, .. } => seed,
        }
    }

    pub fn is_low_discrepancy(&self) -> bool {
        matches!(self, Sampler::LowDiscrepancy { .. })
    }

    /// Same kind of sampler with an independent seed for randomization `r`.
    pub fn randomization(&self, r: u64) -> Sampler {
        let seed = splitmix64(self.seed() ^ splitmix64(r.wrapping_add(0x5851_f42d_4c95_7f2d)));
        match *self {
            Sampler::PseudoRandom { .. } => Sampler::PseudoRandom { seed },
            Sampler::LowDiscrepancy { kind, .. } => Sampler::LowDiscrepancy { seed, kind },
        }
    }

    /// Checks that `points` points of dimension `dimension` can be produced.
    pub fn check_capacity(&self, points: u64, dimension: usize) -> Result<(), SchemeError> {
        if let Sampler::LowDiscrepancy { kind: QmcKind::Sobol, .. } = self {
            if dimension > SOBOL_MAX_DIMENSION {
                return Err(SchemeError::QmcDimension { dimension, max: SOBOL_MAX_DIMENSION });
            }
            if points > SOBOL_MAX_POINTS {
                return Err(SchemeError::QmcPoints { points, max: SOBOL_MAX_POINTS });
            }
        }
        Ok(())
    }

    /// Fills `out` with the uniform point of index `index` in `[0, 1)^d`.
    /// Pseudo-random points come from an independent ChaCha stream per index.
    pub fn point(&self, index: u64, out: &mut [f64]) {
        match *self {
            Sampler::PseudoRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index);
                for o in out.iter_mut() {
                    *o = rng.random::<f64>();
                }
            }
            Sampler::LowDiscrepancy { seed, kind: QmcKind::Sobol } => {
                let seed32 = (splitmix64(seed) >> 32) as u32;
                for (d, o) in out.iter_mut().enumerate() {
                    let bits = sobol_u32(index as u32, d as u32, seed32);
                    *o = (f64::from(bits) + 0.5) / 4_294_967_296.0;
                }
            }
            Sampler::LowDiscrepancy { seed, kind: QmcKind::Halton } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for (d, o) in out.iter_mut().enumerate() {
                    let shift: f64 = rng.random();
                    let v = radical_inverse(index + 1, nth_prime(d)) + shift;
                    *o = if v >= 1.0 { v - 1.0 } else { v };
                }
            }
        }
    }
}

// Same construction as `sobol_burley::sample`, kept at 32-bit resolution.
fn sobol_u32(index: u32, dimension: u32, seed: u32) -> u32 {
    let shuffled = owen_scramble_rev(index.reverse_bits(), hash(seed ^ 0x79c6_8e4a));
    let sobol = sobol_rev(shuffled, dimension);
    let scramble = {
        let seed = seed.wrapping_mul(0x9c8f_2d3b);
        let ds = dimension >> 2;
        ds ^ seed ^ [0x912f_69ba, 0x174f_18ab, 0x691e_72ca, 0xb40c_c1b8][dimension as usize & 0b11]
    };
    owen_scramble_rev(sobol, hash(scramble)).reverse_bits()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

fn nth_prime(n: usize) -> u64 {
    let mut count = 0;
    let mut candidate = 1u64;
    loop {
        candidate += 1;
        if (2..).take_while(|d| d * d <= candidate).all(|d| !candidate.is_multiple_of(d)) {
            if count == n {
                return candidate;
            }
            count += 1;
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
