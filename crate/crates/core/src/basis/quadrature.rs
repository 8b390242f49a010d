use std::sync::OnceLock;

/// Number of nodes in the fixed Gauss–Hermite rule.
pub const GAUSS_HERMITE_NODES: usize = 200;

/// Nodes and weights of the 200-point Gauss–Hermite rule for the weight
/// `exp(-x²)`, ascending in `x`. Weights sum to `√π`.
pub fn gauss_hermite_nodes() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(GAUSS_HERMITE_NODES))
}

// Nodes are the eigenvalues of the Jacobi matrix (zero diagonal,
// off-diagonal sqrt(k/2)), located by Sturm-sequence bisection and polished
// by Newton on the orthonormal Hermite recurrence, which also yields the
// weights 2 / (H_n')^2.
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let off_sq: Vec<f64> = (1..n).map(|k| k as f64 / 2.0).collect();
    // Number of eigenvalues strictly below x.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = -x;
        if d < 0.0 {
            count += 1;
        }
        for &b2 in &off_sq {
            let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
            d = -x - b2 / prev;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = 2.0 * (n as f64 / 2.0).sqrt() + 1.0;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let hermite = |z: f64| -> (f64, f64) {
        let mut p1 = pim4;
        let mut p2 = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut z = 0.5 * (lo + hi);
            for _ in 0..3 {
                let (p, dp) = hermite(z);
                let step = p / dp;
                if step.is_finite() && step.abs() < (hi - lo).max(1e-12) {
                    z -= step;
                }
            }
            let (_, dp) = hermite(z);
            (z, 2.0 / (dp * dp))
        })
        .collect();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (rule[j].0 - rule[i].0);
        let w = 0.5 * (rule[i].1 + rule[j].1);
        rule[i] = (-x, w);
        rule[j] = (x, w);
    }
    if n % 2 == 1 {
        rule[n / 2].0 = 0.0;
    }
    rule
}
