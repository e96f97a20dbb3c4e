//! Monte Carlo estimators with order-fixed reductions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, not on how the values were computed.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: Complex64,
    /// Standard errors of the real and imaginary parts.
    pub se_re: f64,
    pub se_im: f64,
    pub n: usize,
}

impl Estimate {
    /// Componentwise test `|mean − target| ≤ k·SE`, with a tiny absolute slack
    /// for estimates with zero variance.
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        let d = self.mean - target;
        d.re.abs() <= k * self.se_re + 1e-12 && d.im.abs() <= k * self.se_im + 1e-12
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    // Shifting by the first value keeps constant samples exact.
    let shift = values[0];
    let offsets: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let mean = shift + pairwise_sum(&offsets) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&squares) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample mean and standard error of complex observations.
pub fn estimate(values: &[Complex64]) -> Estimate {
    assert!(!values.is_empty(), "no samples");
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    let (mr, sr) = mean_and_se(&re);
    let (mi, si) = mean_and_se(&im);
    Estimate { mean: Complex64::new(mr, mi), se_re: sr, se_im: si, n: values.len() }
}

/// Estimate of `E[e^{⟨u, X⟩}]` from samples of `X`.
pub fn empirical_transform(samples: &[Vec<i64>], u: &[Complex64]) -> Estimate {
    let values: Vec<Complex64> = samples
        .par_iter()
        .map(|x| x.iter().zip(u).map(|(&xi, ui)| ui * xi as f64).sum::<Complex64>().exp())
        .collect();
    estimate(&values)
}
