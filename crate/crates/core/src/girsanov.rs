//! Girsanov density of fractional Brownian motion for drifts with absolutely
//! continuous primitives, and the exponential-moment probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fbm::{sample_fbm_circulant, HurstParam, PathBatch, PathKind, TimeGrid};
use crate::frac_calc::SampledFunction;
use crate::kernel_ops::kh_inverse_full;
use crate::quad::trapezoid;
use crate::scalar::Scalar;
use crate::skew_sde::mollifier;
use crate::stats::MeanEstimate;

fn require_up_to_half<T: Scalar>(h: HurstParam<T>) -> Result<T> {
    if h.h() <= T::of(0.5) {
        Ok(h.h())
    } else {
        Err(domain(format!("Girsanov density is implemented for h ≤ 1/2, got {}", h.h())))
    }
}

/// `v = K_H^{-1}(∫_0^· u dr)` on the full grid for each component.
fn shifts<T: Scalar>(h: T, u: &[Vec<T>], dt: T) -> Vec<Vec<T>> {
    u.iter().map(|uc| kh_inverse_full(h, uc, dt)).collect()
}

/// `log ξ = −Σ_c Σ_j v_c(t_j) ΔW_j − ½ Σ_c ∫ v_c² ds` (left-point sum, trapezoid).
fn log_weight<T: Scalar>(v: &[Vec<T>], w: &PathBatch<T>, p: usize, dt: T) -> T {
    let mut stoch = T::zero();
    let mut quad = T::zero();
    for (c, vc) in v.iter().enumerate() {
        let dw = w.increments(p, c);
        for (j, &x) in dw.iter().enumerate() {
            stoch = stoch + vc[j] * x;
        }
        let sq: Vec<T> = vc.iter().map(|&x| x * x).collect();
        quad = quad + trapezoid(&sq, dt);
    }
    -stoch - T::of(0.5) * quad
}

fn check_wiener<T: Scalar>(w: &PathBatch<T>) -> Result<()> {
    if w.kind() != PathKind::Wiener {
        return Err(domain("Girsanov weights need a batch of Wiener paths"));
    }
    Ok(())
}

/// Per-path density `ξ_T` for a deterministic drift `u` (one sampled
/// function per component, on the grid of `w`).
pub fn girsanov_weight<T: Scalar>(h: HurstParam<T>, u: &[SampledFunction<T>], w: &PathBatch<T>) -> Result<Vec<T>> {
    let hh = require_up_to_half(h)?;
    check_wiener(w)?;
    if u.len() != w.dim() {
        return Err(domain(format!("drift has {} components, noise has {}", u.len(), w.dim())));
    }
    let grid = w.grid();
    for uc in u {
        if uc.len() != grid.n_nodes() || uc.a() != T::zero() || uc.b() != grid.t_end() {
            return Err(Error::GridMismatch("drift samples must live on the noise grid".into()));
        }
    }
    let dt = grid.dt();
    let raw: Vec<Vec<T>> = u.iter().map(|f| f.values().to_vec()).collect();
    let v = shifts(hh, &raw, dt);
    weights_from_log((0..w.count()).into_par_iter().map(|p| log_weight(&v, w, p, dt)).collect())
}

/// Per-path density for an adapted drift: `u(p)` returns the drift samples
/// of path `p`, one vector of `n + 1` values per component.
pub fn girsanov_weight_adapted<T, U>(h: HurstParam<T>, w: &PathBatch<T>, u: U) -> Result<Vec<T>>
where
    T: Scalar,
    U: Fn(usize) -> Vec<Vec<T>> + Sync,
{
    let hh = require_up_to_half(h)?;
    check_wiener(w)?;
    let dt = w.grid().dt();
    let n = w.grid().n_nodes();
    let logs: Result<Vec<T>> = (0..w.count())
        .into_par_iter()
        .map(|p| {
            let up = u(p);
            if up.len() != w.dim() || up.iter().any(|c| c.len() != n) {
                return Err(Error::GridMismatch(format!("adapted drift of path {p} has the wrong shape")));
            }
            Ok(log_weight(&shifts(hh, &up, dt), w, p, dt))
        })
        .collect();
    weights_from_log(logs?)
}

fn weights_from_log<T: Scalar>(logs: Vec<T>) -> Result<Vec<T>> {
    logs.into_iter()
        .enumerate()
        .map(|(p, l)| {
            let x = l.exp();
            if x.is_finite() && l.is_finite() {
                Ok(x)
            } else {
                Err(Error::NonFinite { path: p, step: 0 })
            }
        })
        .collect()
}

/// Monte-Carlo estimate of `E[exp(k ∫_0^T (K_H^{-1}(∫_0^· φ_{x,ε}(B^H_u) du))² dt)]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpMomentEstimate {
    pub k: f64,
    pub eps: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// Fraction of paths whose exponential overflowed; excluded from the mean.
    pub censored_fraction: f64,
    pub count: usize,
}

/// Per-path exponents `∫_0^T v(t)² dt` with `v = K_H^{-1}(∫ φ_{x,ε}(B^H))`.
pub fn exp_moment_exponents<T: Scalar>(h: HurstParam<T>, bh: &PathBatch<T>, eps: T, x: &[T]) -> Result<Vec<T>> {
    let hh = require_up_to_half(h)?;
    if x.len() != bh.dim() {
        return Err(domain(format!("point has {} coordinates, paths have {}", x.len(), bh.dim())));
    }
    mollifier(x, eps)?;
    let d = bh.dim();
    let grid = bh.grid();
    let dt = grid.dt();
    let n = grid.n_nodes();
    Ok((0..bh.count())
        .into_par_iter()
        .map(|p| {
            let path = bh.path(p);
            let mut y = vec![T::zero(); d];
            let u: Vec<T> = (0..n)
                .map(|i| {
                    for c in 0..d {
                        y[c] = path[i * d + c] - x[c];
                    }
                    mollifier(&y, eps).expect("width checked")
                })
                .collect();
            let v = kh_inverse_full(hh, &u, dt);
            let sq: Vec<T> = v.iter().map(|&a| a * a).collect();
            trapezoid(&sq, dt)
        })
        .collect())
}

/// Exponential-moment probe at one `(k, ε)` from precomputed exponents, so
/// several `k` can share common random numbers.
pub fn exp_moment_from_exponents<T: Scalar>(exponents: &[T], k: T, eps: T) -> ExpMomentEstimate {
    let mut kept = Vec::with_capacity(exponents.len());
    for &q in exponents {
        let v = (k * q).exp();
        if v.is_finite() {
            kept.push(v.as_f64());
        }
    }
    let censored = exponents.len() - kept.len();
    let est = MeanEstimate::from_samples(&kept);
    ExpMomentEstimate {
        k: k.as_f64(),
        eps: eps.as_f64(),
        estimate: est.mean,
        stderr: est.stderr,
        censored_fraction: censored as f64 / exponents.len() as f64,
        count: exponents.len(),
    }
}

/// Samples `count` fBm paths (circulant embedding, stream `seed`) and
/// estimates the exponential moment at `(k, ε, x)`.
#[allow(clippy::too_many_arguments)]
pub fn exp_moment_probe<T: Scalar>(
    h: HurstParam<T>,
    d: usize,
    k: T,
    eps: T,
    x: &[T],
    count: usize,
    grid: TimeGrid<T>,
    seed: u64,
) -> Result<ExpMomentEstimate> {
    let bh = sample_fbm_circulant(h, grid, d, count, seed)?;
    let q = exp_moment_exponents(h, &bh, eps, x)?;
    Ok(exp_moment_from_exponents(&q, k, eps))
}
