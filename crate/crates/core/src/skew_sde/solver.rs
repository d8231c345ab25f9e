use rayon::prelude::*;

use super::drift::{mollifier_unchecked, Drift, MollifiedDrift};
use crate::error::{domain, Error, Result};
use crate::fbm::{HurstParam, PathBatch, PathKind, TimeGrid};
use crate::scalar::Scalar;

/// Explicit Euler for one path: `X_{i+1} = X_i + b(t_i, X_i) Δt + ΔB_i`.
/// `noise` holds `(n+1)·d` node values; `out` receives the same shape.
///
/// The drift integral is accumulated separately and added to `x0 + B_{i+1}`,
/// so a vanishing drift reproduces the shifted noise exactly. On error the
/// offending step index is returned.
pub fn euler_path<T: Scalar>(b: &dyn Drift<T>, x0: &[T], noise: &[T], grid: &TimeGrid<T>, out: &mut [T]) -> std::result::Result<(), usize> {
    let d = x0.len();
    let dt = grid.dt();
    let mut drift = vec![T::zero(); d];
    let mut integral = vec![T::zero(); d];
    for c in 0..d {
        out[c] = x0[c] + noise[c];
    }
    for i in 0..grid.n_steps() {
        let (done, rest) = out.split_at_mut((i + 1) * d);
        b.eval(grid.node(i), &done[i * d..], &mut drift);
        for c in 0..d {
            integral[c] = integral[c] + drift[c] * dt;
            let v = x0[c] + integral[c] + noise[(i + 1) * d + c];
            if !v.is_finite() {
                return Err(i + 1);
            }
            rest[c] = v;
        }
    }
    Ok(())
}

/// Euler solution of `dX = b(t, X) dt + dB` for every path of `noise`.
pub fn euler_solve<T: Scalar>(b: &dyn Drift<T>, x0: &[T], noise: &PathBatch<T>) -> Result<PathBatch<T>> {
    let d = noise.dim();
    if x0.len() != d || b.dim() != d {
        return Err(domain(format!(
            "dimension mismatch: x0 has {}, drift {}, noise {}",
            x0.len(),
            b.dim(),
            d
        )));
    }
    let grid = *noise.grid();
    let stride = grid.n_nodes() * d;
    let mut data = vec![T::zero(); stride * noise.count()];
    let failures: Vec<(usize, usize)> = data
        .par_chunks_mut(stride)
        .enumerate()
        .filter_map(|(p, out)| euler_path(b, x0, noise.path(p), &grid, out).err().map(|step| (p, step)))
        .collect();
    if let Some(&(path, step)) = failures.first() {
        return Err(Error::NonFinite { path, step });
    }
    let mut out = PathBatch::from_data(d, grid, noise.count(), noise.seed(), PathKind::Solution, "euler", data)?;
    if let Some(h) = noise.hurst() {
        out = out.with_hurst(h);
    }
    Ok(out)
}

/// Parameters of the mollified skew equation `X = x0 + ∫ α φ_{1/n}(X) 1_d ds + B^H`.
#[derive(Debug, Clone)]
pub struct SkewConfig<T> {
    pub alpha: T,
    pub x0: Vec<T>,
    pub h: HurstParam<T>,
    pub grid: TimeGrid<T>,
    pub n_moll: usize,
}

impl<T: Scalar> SkewConfig<T> {
    pub fn new(alpha: T, x0: Vec<T>, h: HurstParam<T>, grid: TimeGrid<T>, n_moll: usize) -> Result<Self> {
        if n_moll == 0 {
            return Err(domain("mollification index must be at least 1"));
        }
        if x0.is_empty() {
            return Err(domain("initial point needs at least one coordinate"));
        }
        Ok(Self { alpha, x0, h, grid, n_moll })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn eps(&self) -> T {
        T::of_usize(self.n_moll).recip()
    }

    /// `h < 1/(2(d+2))`, the regime where a strong solution is known to exist.
    pub fn existence_regime(&self) -> bool {
        self.h.h() < T::of(1.0 / (2.0 * (self.dim() as f64 + 2.0)))
    }

    pub fn drift(&self) -> MollifiedDrift<T> {
        MollifiedDrift::new(self.alpha, self.eps(), self.dim()).expect("validated config")
    }
}

/// Euler solve with drift `α φ_{1/n}(y) 1_d`.
pub fn solve_skew_mollified<T: Scalar>(cfg: &SkewConfig<T>, noise: &PathBatch<T>) -> Result<PathBatch<T>> {
    noise.check_same_grid(&cfg.grid)?;
    euler_solve(&cfg.drift(), &cfg.x0, noise)
}

/// Smallest mollifier width resolved by the grid: `√ε ≥ 4 · RMS(|ΔB|)`
/// with `RMS(|ΔB|) = √d · Δt^H`.
pub fn min_resolved_eps<T: Scalar>(h: HurstParam<T>, grid: &TimeGrid<T>, dim: usize) -> T {
    let rms = T::of_usize(dim).sqrt() * grid.dt().powf(h.h());
    let r = T::of(4.0) * rms;
    r * r
}

/// Default local-time schedule `ε = 2^{−j}`, `j = 2..=7`.
pub fn default_eps_schedule<T: Scalar>() -> Vec<T> {
    (2..=7).map(|j| T::of(2f64.powi(-j))).collect()
}

/// Occupation integrals `∫_0^T φ_ε(X_s − level) ds` per path and width.
#[derive(Debug, Clone)]
pub struct LocalTimeEstimates<T> {
    pub eps: Vec<T>,
    /// `values[k][p]`: width `eps[k]`, path `p`.
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> LocalTimeEstimates<T> {
    pub fn means(&self) -> Vec<crate::stats::MeanEstimate<T>> {
        self.values.iter().map(|v| crate::stats::MeanEstimate::from_samples(v)).collect()
    }

    /// Successive relative changes of the mean across the schedule.
    pub fn relative_changes(&self) -> Vec<T> {
        let m = self.means();
        m.windows(2).map(|w| ((w[1].mean - w[0].mean) / w[0].mean).abs()).collect()
    }

    /// Whether the last successive relative change is below `tol`.
    pub fn stabilized(&self, tol: T) -> bool {
        self.relative_changes().last().is_some_and(|&c| c < tol)
    }
}

/// Trapezoid occupation integral of one path between nodes `from ≤ to`.
pub fn occupation_integral<T: Scalar>(path: &[T], dim: usize, dt: T, level: &[T], eps: T, from: usize, to: usize) -> T {
    let mut y = vec![T::zero(); dim];
    let mut phi = |i: usize| {
        for c in 0..dim {
            y[c] = path[i * dim + c] - level[c];
        }
        mollifier_unchecked(&y, eps)
    };
    if to <= from {
        return T::zero();
    }
    let mut acc = (phi(from) + phi(to)) * T::of(0.5);
    for i in (from + 1)..to {
        acc = acc + phi(i);
    }
    acc * dt
}

/// Mollified local time at `level` over `[0, T]` for each width of `eps_schedule`.
pub fn local_time<T: Scalar>(x: &PathBatch<T>, level: &[T], eps_schedule: &[T]) -> Result<LocalTimeEstimates<T>> {
    if eps_schedule.is_empty() {
        return Err(domain("local time needs a non-empty width schedule"));
    }
    if eps_schedule.iter().any(|&e| !(e > T::zero())) || eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(domain("width schedule must be positive and strictly decreasing"));
    }
    if level.len() != x.dim() {
        return Err(domain(format!("level has {} coordinates, paths have {}", level.len(), x.dim())));
    }
    let n = x.grid().n_steps();
    let dt = x.grid().dt();
    let values = eps_schedule
        .iter()
        .map(|&eps| {
            (0..x.count())
                .into_par_iter()
                .map(|p| occupation_integral(x.path(p), x.dim(), dt, level, eps, 0, n))
                .collect()
        })
        .collect();
    Ok(LocalTimeEstimates { eps: eps_schedule.to_vec(), values })
}
