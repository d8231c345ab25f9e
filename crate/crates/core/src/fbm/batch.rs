use rayon::prelude::*;

use super::grid::TimeGrid;
use crate::error::{Error, Result};
use crate::rng::PathStream;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Wiener,
    FractionalBrownian,
    Solution,
}

impl PathKind {
    pub fn tag(self) -> &'static str {
        match self {
            PathKind::Wiener => "wiener",
            PathKind::FractionalBrownian => "fbm",
            PathKind::Solution => "solution",
        }
    }
}

/// Ensemble of `count` paths of a `dim`-dimensional process on a grid.
///
/// Storage is path-major: `data[(p * n_nodes + i) * dim + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch<T> {
    dim: usize,
    grid: TimeGrid<T>,
    count: usize,
    seed: u64,
    kind: PathKind,
    method: String,
    hurst: Option<T>,
    data: Vec<T>,
}

impl<T: Scalar> PathBatch<T> {
    /// Fills every path in parallel. `fill(stream, out)` writes one path of
    /// `n_nodes * dim` values; the stream is determined by `(seed, path)`.
    pub fn generate<F>(
        dim: usize,
        grid: TimeGrid<T>,
        count: usize,
        seed: u64,
        kind: PathKind,
        method: &str,
        fill: F,
    ) -> Result<Self>
    where
        F: Fn(&mut PathStream, &mut [T]) + Sync,
    {
        check_shape(dim, count)?;
        let stride = grid.n_nodes() * dim;
        let mut data = vec![T::zero(); stride * count];
        data.par_chunks_mut(stride).enumerate().for_each(|(p, out)| {
            let mut stream = PathStream::new(seed, p as u64);
            fill(&mut stream, out);
        });
        Ok(Self { dim, grid, count, seed, kind, method: method.to_string(), hurst: None, data })
    }

    /// Same as [`generate`](Self::generate) with per-worker scratch state.
    pub(crate) fn generate_with<S, I, F>(
        dim: usize,
        grid: TimeGrid<T>,
        count: usize,
        seed: u64,
        kind: PathKind,
        method: &str,
        init: I,
        fill: F,
    ) -> Result<Self>
    where
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &mut PathStream, &mut [T]) + Sync + Send,
    {
        check_shape(dim, count)?;
        let stride = grid.n_nodes() * dim;
        let mut data = vec![T::zero(); stride * count];
        data.par_chunks_mut(stride).enumerate().for_each_init(init, |scratch, (p, out)| {
            let mut stream = PathStream::new(seed, p as u64);
            fill(scratch, &mut stream, out);
        });
        Ok(Self { dim, grid, count, seed, kind, method: method.to_string(), hurst: None, data })
    }

    /// Wraps existing data, validating shape and finiteness.
    pub fn from_data(
        dim: usize,
        grid: TimeGrid<T>,
        count: usize,
        seed: u64,
        kind: PathKind,
        method: &str,
        data: Vec<T>,
    ) -> Result<Self> {
        check_shape(dim, count)?;
        let stride = grid.n_nodes() * dim;
        if data.len() != stride * count {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                stride * count,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { path: pos / stride, step: (pos % stride) / dim });
        }
        Ok(Self { dim, grid, count, seed, kind, method: method.to_string(), hurst: None, data })
    }

    pub(crate) fn with_hurst(mut self, h: T) -> Self {
        self.hurst = Some(h);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn hurst(&self) -> Option<T> {
        self.hurst
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn stride(&self) -> usize {
        self.grid.n_nodes() * self.dim
    }

    /// All values of path `p`, node-major.
    pub fn path(&self, p: usize) -> &[T] {
        let s = self.stride();
        &self.data[p * s..(p + 1) * s]
    }

    pub fn value(&self, p: usize, node: usize, comp: usize) -> T {
        self.data[(p * self.grid.n_nodes() + node) * self.dim + comp]
    }

    /// Time series of one component of one path.
    pub fn component(&self, p: usize, comp: usize) -> Vec<T> {
        self.path(p).iter().skip(comp).step_by(self.dim).copied().collect()
    }

    /// Values of one component at one node across all paths.
    pub fn cross_section(&self, node: usize, comp: usize) -> Vec<T> {
        (0..self.count).map(|p| self.value(p, node, comp)).collect()
    }

    /// Increments `X_{i+1} − X_i` of one component of one path.
    pub fn increments(&self, p: usize, comp: usize) -> Vec<T> {
        let c = self.component(p, comp);
        c.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn check_same_grid(&self, other: &TimeGrid<T>) -> Result<()> {
        if self.grid != *other {
            return Err(Error::GridMismatch(format!(
                "batch grid has {} steps to {}, expected {} steps to {}",
                self.grid.n_steps(),
                self.grid.t_end(),
                other.n_steps(),
                other.t_end()
            )));
        }
        Ok(())
    }
}

fn check_shape(dim: usize, count: usize) -> Result<()> {
    if dim == 0 || count == 0 {
        return Err(Error::Domain(format!("batch needs dim ≥ 1 and count ≥ 1, got dim={dim}, count={count}")));
    }
    Ok(())
}

/// Standard Wiener paths: increments `N(0, dt)` drawn component-major per node.
pub fn sample_wiener<T: Scalar>(grid: TimeGrid<T>, dim: usize, count: usize, seed: u64) -> Result<PathBatch<T>> {
    let sd = grid.dt().sqrt();
    PathBatch::generate(dim, grid, count, seed, PathKind::Wiener, "wiener", |stream, out| {
        for c in 0..dim {
            out[c] = T::zero();
        }
        for i in 1..grid.n_nodes() {
            for c in 0..dim {
                out[i * dim + c] = out[(i - 1) * dim + c] + sd * T::of(stream.normal());
            }
        }
    })
    .map(|b| b.with_hurst(T::of(0.5)))
}
