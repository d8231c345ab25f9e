//! Fractional Brownian motion path generation.
//!
//! Three samplers share one seeding contract: path `p` of a batch draws its
//! Gaussians from the counter-based stream `(seed, p)`, so a batch does not
//! depend on the number of worker threads.

mod batch;
mod cholesky;
mod circulant;
pub mod export;
mod grid;

pub use batch::{sample_wiener, PathBatch, PathKind};
pub use cholesky::{cholesky, covariance_factor, sample_fbm_cholesky, CHOLESKY_MAX_STEPS};
pub use circulant::{sample_fbm_circulant, MAX_DOUBLINGS};
pub use grid::{fbm_covariance, HurstParam, TimeGrid};

pub use crate::kernel_ops::sample_fbm_volterra;

/// Exact sampler used by default: circulant embedding.
pub fn sample_fbm<T: crate::Scalar>(
    h: HurstParam<T>,
    grid: TimeGrid<T>,
    dim: usize,
    count: usize,
    seed: u64,
) -> crate::Result<PathBatch<T>> {
    sample_fbm_circulant(h, grid, dim, count, seed)
}
