use serde::Serialize;

use super::partial::MultiIndex;
use crate::error::{domain, Error, Result};
use crate::fbm::{sample_fbm_circulant, HurstParam, TimeGrid};
use crate::scalar::Scalar;
use crate::stats::MeanEstimate;

/// Largest number of factors accepted by [`mc_simplex_expectation`].
pub const MC_FACTOR_MAX: usize = 4;

/// `D^α f` for the bump `f(z) = a·Π_l exp(−(z_l − c_l)²/(2w²))`.
#[derive(Debug, Clone, Serialize)]
pub struct BumpFactor<T> {
    pub amplitude: T,
    pub center: Vec<T>,
    pub width: T,
    pub alpha: MultiIndex,
}

/// Probabilists' Hermite polynomial `He_n(x)`.
fn hermite<T: Scalar>(n: u32, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - T::of(k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl<T: Scalar> BumpFactor<T> {
    pub fn new(amplitude: T, center: Vec<T>, width: T, alpha: MultiIndex) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(domain("bump width must be positive"));
        }
        if alpha.len() != center.len() {
            return Err(domain("multi-index and centre dimensions differ"));
        }
        Ok(Self { amplitude, center, width, alpha })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `∂_l^n e^{−y²/(2w²)} = (−1/w)^n He_n(y/w) e^{−y²/(2w²)}`.
    pub fn eval(&self, z: &[T]) -> T {
        let mut v = self.amplitude;
        for ((&zl, &cl), &n) in z.iter().zip(&self.center).zip(&self.alpha) {
            let u = (zl - cl) / self.width;
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            v = v * sign * hermite(n, u) * self.width.powi(-(n as i32)) * (-(u * u) * T::of(0.5)).exp();
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplexExpectation<T> {
    pub estimate: MeanEstimate<T>,
    pub m: usize,
    pub n_steps: usize,
}

/// `E ∫_{Δ^m_{θ,t}} Π_j D^{α_j} f_j(B^H_{s_j}) ds` by Monte Carlo over fBm
/// paths on an `n_steps` grid of `[0, t]`; each path's simplex integral is a
/// running trapezoid recursion on the grid. `θ` is rounded to the nearest
/// grid node.
pub fn mc_simplex_expectation<T: Scalar>(
    factors: &[BumpFactor<T>],
    h: HurstParam<T>,
    theta: T,
    t: T,
    n_steps: usize,
    count: usize,
    seed: u64,
) -> Result<SimplexExpectation<T>> {
    let m = factors.len();
    if m > MC_FACTOR_MAX {
        return Err(Error::Budget(format!("at most {MC_FACTOR_MAX} factors, got {m}")));
    }
    if !(theta >= T::zero() && theta < t) {
        return Err(domain("need 0 ≤ θ < t"));
    }
    let d = factors.first().map_or(1, BumpFactor::dim);
    if factors.iter().any(|f| f.dim() != d) {
        return Err(domain("all factors must share one dimension"));
    }
    let grid = TimeGrid::new(t, n_steps)?;
    let start = (theta / grid.dt()).round().to_usize().unwrap_or(0).min(n_steps - 1);
    let paths = sample_fbm_circulant(h, grid, d, count, seed)?;
    let dt = grid.dt();
    let half = T::of(0.5) * dt;
    let samples: Vec<T> = (0..count)
        .map(|p| {
            let path = paths.path(p);
            let len = n_steps + 1 - start;
            let mut acc = vec![T::one(); len];
            for f in factors.iter().rev() {
                let vals: Vec<T> = (0..len)
                    .map(|i| {
                        let node = start + i;
                        f.eval(&path[node * d..(node + 1) * d]) * acc[i]
                    })
                    .collect();
                let mut run = T::zero();
                acc[0] = T::zero();
                for i in 1..len {
                    run = run + half * (vals[i - 1] + vals[i]);
                    acc[i] = run;
                }
            }
            acc[len - 1]
        })
        .collect();
    Ok(SimplexExpectation { estimate: MeanEstimate::from_samples(&samples), m, n_steps })
}
