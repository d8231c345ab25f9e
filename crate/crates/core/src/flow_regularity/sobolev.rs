use rayon::prelude::*;
use serde::Serialize;

use super::derivatives::{second_variation, variational_jacobian};
use super::tensor::{matrix_norm, tensor3_norm, vector_norm};
use crate::error::{domain, Error, Result};
use crate::fbm::PathBatch;
use crate::quad::simpson_weights;
use crate::scalar::Scalar;
use crate::skew_sde::{euler_path, Drift};

/// Per-path norms `‖D^i X_t^x‖` on a tensor grid over a box.
#[derive(Debug, Clone)]
pub struct FlowSamples<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub nodes_per_axis: usize,
    /// `norms[i][g][p]`: order `i`, grid node `g` (axis 0 fastest), path `p`.
    pub norms: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> FlowSamples<T> {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn max_order(&self) -> usize {
        self.norms.len().saturating_sub(1)
    }

    pub fn volume(&self) -> T {
        self.lo.iter().zip(&self.hi).fold(T::one(), |acc, (&a, &b)| acc * (b - a))
    }

    /// Coordinates of grid node `g`.
    pub fn point(&self, g: usize) -> Vec<T> {
        let n = self.nodes_per_axis;
        let mut rest = g;
        (0..self.dim())
            .map(|c| {
                let i = rest % n;
                rest /= n;
                self.lo[c] + (self.hi[c] - self.lo[c]) * T::of_usize(i) / T::of_usize(n - 1)
            })
            .collect()
    }
}

/// Solve the flow from every node of an `nodes_per_axis^d` grid over
/// `[lo, hi]` and record the norms of `X`, `DX` and (for `k = 2`) `D²X` at
/// time index `node`.
pub fn sample_flow_box<T: Scalar>(
    b: &dyn Drift<T>,
    noise: &PathBatch<T>,
    lo: &[T],
    hi: &[T],
    nodes_per_axis: usize,
    k: usize,
    node: usize,
) -> Result<FlowSamples<T>> {
    let d = b.dim();
    if lo.len() != d || hi.len() != d || noise.dim() != d {
        return Err(Error::GridMismatch("box, drift and noise dimensions differ".into()));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
        return Err(domain("box must have lo < hi on every axis"));
    }
    if nodes_per_axis < 2 {
        return Err(domain("need at least two quadrature nodes per axis"));
    }
    if k > 2 {
        return Err(domain(format!("derivative order is capped at 2, got {k}")));
    }
    let grid = *noise.grid();
    if node >= grid.n_nodes() {
        return Err(domain("time index beyond the grid"));
    }
    let total = nodes_per_axis.pow(d as u32);
    let mut samples = FlowSamples {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        nodes_per_axis,
        norms: vec![vec![Vec::new(); total]; k + 1],
    };
    let points: Vec<Vec<T>> = (0..total).map(|g| samples.point(g)).collect();
    let per_node: Result<Vec<Vec<Vec<T>>>> = points
        .par_iter()
        .map(|x| {
            let mut orders = vec![Vec::with_capacity(noise.count()); k + 1];
            let mut path = vec![T::zero(); grid.n_nodes() * d];
            for p in 0..noise.count() {
                euler_path(b, x, noise.path(p), &grid, &mut path).map_err(|step| Error::NonFinite { path: p, step })?;
                orders[0].push(vector_norm(&path[node * d..(node + 1) * d]));
                if k >= 1 {
                    let jac = variational_jacobian(b, &path, &grid)?;
                    orders[1].push(matrix_norm(&jac[node * d * d..(node + 1) * d * d], d));
                    if k == 2 {
                        let s = second_variation(b, &path, &jac, &grid)?;
                        orders[2].push(tensor3_norm(&s[node * d * d * d..(node + 1) * d * d * d], d));
                    }
                }
            }
            Ok(orders)
        })
        .collect();
    for (g, orders) in per_node?.into_iter().enumerate() {
        for (i, v) in orders.into_iter().enumerate() {
            samples.norms[i][g] = v;
        }
    }
    Ok(samples)
}

/// `Σ_{i≤k} (∫_𝒰 E‖D^i X‖^p dx)^{2/p}` by tensor Simpson quadrature.
#[derive(Debug, Clone, Serialize)]
pub struct SobolevEstimate<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub k: usize,
    pub p: T,
    pub estimate: T,
    /// Contribution of each order before summation.
    pub per_order: Vec<T>,
    pub nodes: usize,
}

pub fn sobolev_norm_estimate<T: Scalar>(samples: &FlowSamples<T>, k: usize, p: T) -> Result<SobolevEstimate<T>> {
    if !(p >= T::of(2.0)) {
        return Err(domain(format!("Sobolev exponent must be at least 2, got {p}")));
    }
    if samples.norms.len() <= k {
        return Err(domain(format!(
            "samples carry derivative orders up to {}, estimate needs {k}",
            samples.max_order()
        )));
    }
    let d = samples.dim();
    let n = samples.nodes_per_axis;
    let axis_w: Vec<Vec<T>> = (0..d)
        .map(|c| simpson_weights(n, (samples.hi[c] - samples.lo[c]) / T::of_usize(n - 1)))
        .collect();
    let total = n.pow(d as u32);
    let mut per_order = Vec::with_capacity(k + 1);
    for order in &samples.norms[..=k] {
        if order.len() != total || order.iter().any(|v| v.is_empty()) {
            return Err(domain("missing samples at some grid node"));
        }
        let mut integral = T::zero();
        for (g, paths) in order.iter().enumerate() {
            let mut w = T::one();
            let mut rest = g;
            for aw in &axis_w {
                w = w * aw[rest % n];
                rest /= n;
            }
            let mean = paths.iter().fold(T::zero(), |acc, &v| acc + v.powf(p)) / T::of_usize(paths.len());
            integral = integral + w * mean;
        }
        per_order.push(integral.max(T::zero()).powf(T::of(2.0) / p));
    }
    Ok(SobolevEstimate {
        lo: samples.lo.clone(),
        hi: samples.hi.clone(),
        k,
        p,
        estimate: per_order.iter().copied().fold(T::zero(), |a, b| a + b),
        per_order,
        nodes: total,
    })
}
