use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::rng::{derive_seed, PathStream};
use crate::scalar::Scalar;
use crate::stats::MeanEstimate;

/// One-dimensional integrand on `[θ, t]`.
pub type Factor<'a, T> = &'a (dyn Fn(T) -> T + Sync);

/// Default number of Chebyshev intervals for the spectral running integral.
pub const SPECTRAL_NODES: usize = 64;

/// Largest simplex dimension evaluated deterministically.
pub const DETERMINISTIC_MAX: usize = 12;

/// Chebyshev–Lobatto collocation on `[θ, t]` with the matrix mapping values
/// `f(x_k)` to `∫_θ^{x_k} f`. Nodes run from `t` (index 0) down to `θ`.
#[derive(Debug, Clone)]
pub struct SpectralSimplex<T> {
    theta: T,
    t: T,
    nodes: Vec<T>,
    matrix: Vec<T>,
}

impl<T: Scalar> SpectralSimplex<T> {
    pub fn new(theta: T, t: T, intervals: usize) -> Result<Self> {
        if !(theta < t) || !theta.is_finite() || !t.is_finite() {
            return Err(domain(format!("need θ < t, got θ = {theta}, t = {t}")));
        }
        if intervals < 2 {
            return Err(domain("spectral rule needs at least two intervals"));
        }
        let n = intervals;
        let np = n + 1;
        let pi = T::PI();
        let cosk = |j: usize, k: usize| (pi * T::of_usize((j * k) % (2 * n)) / T::of_usize(n)).cos();
        let half = T::of(0.5) * (t - theta);
        let nodes: Vec<T> = (0..np).map(|k| theta + half * (T::one() + cosk(1, k))).collect();
        let mut matrix = vec![T::zero(); np * np];
        for i in 0..np {
            // Chebyshev coefficients of the i-th cardinal function.
            let mut a: Vec<T> = (0..np)
                .map(|j| {
                    let w = if i == 0 || i == n { T::of(0.5) } else { T::one() };
                    T::of(2.0) / T::of_usize(n) * w * cosk(j, i)
                })
                .collect();
            a[0] = a[0] * T::of(0.5);
            a[n] = a[n] * T::of(0.5);
            // Coefficients of the antiderivative on [−1, 1].
            let mut b = vec![T::zero(); np + 1];
            b[1] = b[1] + a[0];
            if n >= 1 {
                b[2] = b[2] + a[1] * T::of(0.25);
            }
            for j in 2..np {
                b[j + 1] = b[j + 1] + a[j] / T::of_usize(2 * (j + 1));
                b[j - 1] = b[j - 1] - a[j] / T::of_usize(2 * (j - 1));
            }
            for k in 0..np {
                let mut acc = T::zero();
                for (j, &bj) in b.iter().enumerate() {
                    let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                    acc = acc + bj * (cosk(j, k) - sign);
                }
                matrix[k * np + i] = acc * half;
            }
        }
        Ok(Self { theta, t, nodes, matrix })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// `s ↦ ∫_θ^s values` at every node.
    pub fn integrate(&self, values: &[T]) -> Vec<T> {
        let np = self.nodes.len();
        (0..np)
            .map(|k| (0..np).fold(T::zero(), |acc, i| acc + self.matrix[k * np + i] * values[i]))
            .collect()
    }

    /// Values of `f` at the nodes.
    pub fn sample(&self, f: Factor<'_, T>) -> Vec<T> {
        self.nodes.iter().map(|&s| f(s)).collect()
    }

    /// `s ↦ ∫_{θ<s_m<⋯<s_1<s} Π f_j(s_j)` at every node; the empty product
    /// gives the constant 1.
    pub fn running(&self, factors: &[Factor<'_, T>]) -> Vec<T> {
        let mut acc = vec![T::one(); self.nodes.len()];
        for f in factors.iter().rev() {
            let prod: Vec<T> = self.nodes.iter().zip(&acc).map(|(&s, &a)| f(s) * a).collect();
            acc = self.integrate(&prod);
        }
        acc
    }

    /// Full integral, the running value at `t`.
    pub fn simplex(&self, factors: &[Factor<'_, T>]) -> T {
        self.running(factors)[0]
    }
}

/// `∫_{Δ^m_{θ,t}} Π_j f_j(s_j) ds` with `θ < s_m < ⋯ < s_1 < t`, by nested
/// spectral running integrals.
pub fn simplex_quadrature<T: Scalar>(factors: &[Factor<'_, T>], theta: T, t: T) -> Result<T> {
    if factors.len() > DETERMINISTIC_MAX {
        return Err(Error::Budget(format!(
            "deterministic simplex quadrature limited to m ≤ {DETERMINISTIC_MAX}, got {}",
            factors.len()
        )));
    }
    Ok(SpectralSimplex::new(theta, t, SPECTRAL_NODES)?.simplex(factors))
}

/// Monte-Carlo estimate: sorted uniforms on `(θ, t)`, reweighted by the
/// simplex volume `(t−θ)^m/m!`.
pub fn simplex_monte_carlo<T: Scalar>(
    factors: &[Factor<'_, T>],
    theta: T,
    t: T,
    count: usize,
    seed: u64,
) -> Result<MeanEstimate<T>> {
    if !(theta < t) {
        return Err(domain("need θ < t"));
    }
    if count < 2 {
        return Err(domain("Monte-Carlo simplex quadrature needs at least two samples"));
    }
    let m = factors.len();
    let vol = (1..=m).fold(T::one(), |acc, j| acc * (t - theta) / T::of_usize(j));
    let seed = derive_seed(seed, 0x5150_1e);
    let samples: Vec<T> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = PathStream::new(seed, i as u64);
            let mut s: Vec<T> = (0..m).map(|_| theta + (t - theta) * T::of(rng.uniform())).collect();
            s.sort_by(|a, b| b.partial_cmp(a).expect("finite samples"));
            factors.iter().zip(&s).fold(vol, |acc, (f, &x)| acc * f(x))
        })
        .collect();
    Ok(MeanEstimate::from_samples(&samples))
}
