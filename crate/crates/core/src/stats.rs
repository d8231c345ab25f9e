//! Deterministic reductions for Monte Carlo output.

use serde::Serialize;

use crate::scalar::Scalar;

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so results do not depend on how the slice was produced.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        values.iter().fold(T::zero(), |acc, &v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub count: usize,
}

impl<T: Scalar> MeanEstimate<T> {
    pub fn from_samples(samples: &[T]) -> Self {
        let count = samples.len();
        if count == 0 {
            return Self { mean: T::nan(), stderr: T::nan(), count };
        }
        let n = T::of_usize(count);
        let mean = pairwise_sum(samples) / n;
        if count == 1 {
            return Self { mean, stderr: T::zero(), count };
        }
        let sq: Vec<T> = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&sq) / (n - T::one());
        Self { mean, stderr: (var / n).sqrt(), count }
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: T) -> T {
        (self.mean - target) / self.stderr
    }
}

/// Unbiased sample covariance of two equally long series and the standard
/// error of that estimate (delta method on the product samples).
pub fn covariance<T: Scalar>(x: &[T], y: &[T]) -> MeanEstimate<T> {
    assert_eq!(x.len(), y.len());
    let mx = pairwise_sum(x) / T::of_usize(x.len());
    let my = pairwise_sum(y) / T::of_usize(y.len());
    let products: Vec<T> = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).collect();
    let mut est = MeanEstimate::from_samples(&products);
    let n = T::of_usize(x.len());
    est.mean = est.mean * n / (n - T::one());
    est
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut xs: Vec<T> = a.to_vec();
    let mut ys: Vec<T> = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
    let (na, nb) = (T::of_usize(xs.len()), T::of_usize(ys.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((T::of_usize(i) / na - T::of_usize(j) / nb).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at significance `level`
/// (asymptotic form `c(level) * sqrt((n+m)/(n m))`).
pub fn ks_critical(level: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (level / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }

    #[test]
    fn mean_estimate_of_constant_has_zero_error() {
        let e = MeanEstimate::from_samples(&[2.0f64; 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn ks_identical_samples_is_zero() {
        let a = [0.1f64, 0.5, 0.2, 0.9];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert!((ks_critical(0.01, 100, 100) - 0.2302).abs() < 1e-3);
    }
}
