use super::batch::{PathBatch, PathKind};
use super::grid::{covariance_unchecked, HurstParam, TimeGrid};
use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Largest grid accepted by the dense sampler.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Dense lower-triangular Cholesky factor of a symmetric matrix stored
/// row-major. Returns the factor row-major with zeros above the diagonal.
pub fn cholesky<T: Scalar>(a: &[T], n: usize) -> Result<Vec<T>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::NotPositiveDefinite { index: i, value: s.as_f64() });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Cholesky factor of `R_H(t_i, t_j)` over the non-zero grid nodes.
pub fn covariance_factor<T: Scalar>(h: HurstParam<T>, grid: &TimeGrid<T>) -> Result<Vec<T>> {
    let n = grid.n_steps();
    let t = grid.nodes();
    let mut cov = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = covariance_unchecked(h.h(), t[i + 1], t[j + 1]);
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }
    cholesky(&cov, n)
}

/// Exact fBm sampler: `B = L z` with `L Lᵀ = R_H` on the grid.
pub fn sample_fbm_cholesky<T: Scalar>(
    h: HurstParam<T>,
    grid: TimeGrid<T>,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<PathBatch<T>> {
    let n = grid.n_steps();
    if n > CHOLESKY_MAX_STEPS {
        return Err(domain(format!("dense sampler is limited to {CHOLESKY_MAX_STEPS} steps, got {n}")));
    }
    let l = covariance_factor(h, &grid)?;
    PathBatch::generate_with(
        dim,
        grid,
        count,
        seed,
        PathKind::FractionalBrownian,
        "cholesky",
        || vec![T::zero(); n],
        |z, stream, out| {
            for c in 0..dim {
                for v in z.iter_mut() {
                    *v = T::of(stream.normal());
                }
                out[c] = T::zero();
                for i in 0..n {
                    let row = &l[i * n..i * n + i + 1];
                    let mut acc = T::zero();
                    for (a, b) in row.iter().zip(z.iter()) {
                        acc = acc + *a * *b;
                    }
                    out[(i + 1) * dim + c] = acc;
                }
            }
        },
    )
    .map(|b| b.with_hurst(h.h()))
}
