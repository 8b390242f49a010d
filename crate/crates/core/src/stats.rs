//! Least-squares line fits and sample moments with a fixed reduction order.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::scalar::{pairwise_sum, Real};

/// Ordinary least-squares fit of `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (0 for two points).
    pub slope_stderr: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub points: usize,
}

impl LineFit {
    /// Half-width of the two-sided confidence interval for the slope.
    pub fn slope_half_width(&self, level: f64) -> f64 {
        if self.points <= 2 {
            return 0.0;
        }
        let t = StudentsT::new(0.0, 1.0, (self.points - 2) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.5 + level / 2.0);
        t * self.slope_stderr
    }
}

/// Fits a line through `(x_i, y_i)`. Needs at least two distinct `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LineFit { slope, intercept, slope_stderr, residual: (sse / nf).sqrt(), points: n })
}

/// Fits `log y` against `log x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Sample mean and unbiased sample variance (two-pass, pairwise sums).
pub fn mean_variance<T: Real>(values: &[T]) -> (T, T) {
    let n = values.len();
    if n == 0 {
        return (T::nan(), T::nan());
    }
    let mean = pairwise_sum(values) / T::from_count(n);
    if n == 1 {
        return (mean, T::zero());
    }
    let dev: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
    (mean, pairwise_sum(&dev) / T::from_count(n - 1))
}
