#![allow(dead_code)]

use discrete_ito::basis::IncrementLaw;
use proptest::prelude::*;

/// A centred finite law with 2 to `max_atoms` distinct atoms.
pub fn centred_law(max_atoms: usize) -> impl Strategy<Value = IncrementLaw<f64>> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 2..=max_atoms).prop_filter_map("distinct atoms", |raw| {
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let weights: Vec<f64> = raw.iter().map(|(_, w)| w / total).collect();
        let mean: f64 = raw.iter().zip(&weights).map(|((x, _), w)| x * w).sum();
        let points: Vec<f64> = raw.iter().map(|(x, _)| x - mean).collect();
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[1] - w[0] < 0.05) {
            return None;
        }
        IncrementLaw::finite(&points, &weights).ok()
    })
}

/// The same law rescaled to unit variance.
pub fn unit_variance(law: &IncrementLaw<f64>) -> IncrementLaw<f64> {
    let sd = law.variance().sqrt();
    let atoms = law.atoms().unwrap();
    let points: Vec<f64> = atoms.iter().map(|a| a.point / sd).collect();
    let weights: Vec<f64> = atoms.iter().map(|a| a.weight).collect();
    IncrementLaw::finite(&points, &weights).unwrap()
}

/// Smooth test function `a sin(b x) + c x² + d e^{x/4}` of a scalar.
pub fn smooth(p: [f64; 4]) -> impl Fn(f64) -> f64 + Copy {
    move |x| p[0] * (p[1] * x).sin() + p[2] * x * x + p[3] * (x / 4.0).exp()
}

pub fn coefficients() -> impl Strategy<Value = [f64; 4]> {
    [-2.0f64..2.0, -2.0f64..2.0, -1.0f64..1.0, -1.0f64..1.0]
}
