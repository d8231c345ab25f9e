//! Spatial derivatives of the Euler flow `x ↦ X_t^{n,x}`: variational
//! equations, truncated Picard series, finite differences, moment tables and
//! Sobolev-norm estimates over a box.

mod derivatives;
mod sobolev;
mod tensor;

use rayon::prelude::*;
use serde::Serialize;

pub use derivatives::{
    default_fd_step, finite_diff_flow, finite_diff_per_path, max_drift_jacobian_norm, picard_jacobian, picard_order_for,
    second_variation, variational_estimate, variational_jacobian, variational_per_path, FlowDerivativeEstimate,
    FlowMethod,
};
pub use sobolev::{sample_flow_box, sobolev_norm_estimate, FlowSamples, SobolevEstimate};
pub use tensor::{matrix_norm, tensor3_norm, vector_norm};

use crate::error::{domain, Result};
use crate::fbm::PathBatch;
use crate::scalar::Scalar;
use crate::skew_sde::SkewConfig;
use crate::stats::MeanEstimate;

/// One row of `E‖∂^k X_T^{n,x}‖^p`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentRow<T> {
    pub n: usize,
    pub x: Vec<T>,
    pub k: usize,
    pub p: T,
    pub estimate: T,
    pub stderr: T,
    /// `‖φ_n‖_{L¹} = |α|·√d`.
    pub l1_norm: T,
}

/// Moments of the flow derivative at the final time for every mollification
/// index in `n_list` and every start point in `x_grid`. All cells share the
/// same noise paths.
pub fn moment_table<T: Scalar>(
    cfg: &SkewConfig<T>,
    n_list: &[usize],
    p: T,
    k: usize,
    x_grid: &[Vec<T>],
    noise: &PathBatch<T>,
) -> Result<Vec<MomentRow<T>>> {
    if !(1..=2).contains(&k) {
        return Err(domain(format!("derivative order must be 1 or 2, got {k}")));
    }
    if !(p > T::zero()) {
        return Err(domain("moment exponent must be positive"));
    }
    noise.check_same_grid(&cfg.grid)?;
    let node = cfg.grid.n_steps();
    let d = cfg.dim();
    let cells: Vec<(usize, &Vec<T>)> = n_list.iter().flat_map(|&n| x_grid.iter().map(move |x| (n, x))).collect();
    cells
        .par_iter()
        .map(|&(n, x)| {
            let mut c = cfg.clone();
            c.n_moll = n;
            c.x0 = x.clone();
            let c = SkewConfig::new(c.alpha, c.x0, c.h, c.grid, c.n_moll)?;
            let drift = c.drift();
            let per = variational_per_path(&drift, noise, x, k, node)?;
            let norms: Vec<T> = per
                .iter()
                .map(|t| if k == 1 { matrix_norm(t, d) } else { tensor3_norm(t, d) }.powf(p))
                .collect();
            let est = MeanEstimate::from_samples(&norms);
            Ok(MomentRow { n, x: x.clone(), k, p, estimate: est.mean, stderr: est.stderr, l1_norm: drift.l1_norm() })
        })
        .collect()
}

/// Max over the start-point grid for each `n`, the proxy for `sup_x`.
pub fn sup_over_x<T: Scalar>(rows: &[MomentRow<T>]) -> Vec<(usize, T)> {
    let mut out: Vec<(usize, T)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(n, _)| *n == r.n) {
            Some(e) => e.1 = e.1.max(r.estimate),
            None => out.push((r.n, r.estimate)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{sample_fbm_circulant, sample_wiener, HurstParam, TimeGrid};
    use crate::skew_sde::{euler_path, Drift, LinearDrift, MollifiedDrift, ZeroDrift};

    fn moll(d: usize) -> MollifiedDrift<f64> {
        MollifiedDrift::new(1.0, 0.5, d).unwrap()
    }

    fn solve(b: &dyn Drift<f64>, x0: &[f64], noise: &PathBatch<f64>, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; noise.grid().n_nodes() * x0.len()];
        euler_path(b, x0, noise.path(p), noise.grid(), &mut out).unwrap();
        out
    }

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn zero_drift_jacobian_is_identity() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let noise = sample_wiener(grid, 2, 1, 3).unwrap();
        let b = ZeroDrift { dim: 2 };
        let path = solve(&b, &[0.1, 0.2], &noise, 0);
        let jac = variational_jacobian(&b, &path, &grid).unwrap();
        for i in 0..grid.n_nodes() {
            assert_eq!(&jac[i * 4..i * 4 + 4], &[1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn linear_jacobian_is_discrete_exponential() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let noise = sample_wiener(grid, 1, 1, 4).unwrap();
        let b = LinearDrift::scalar(-1.0);
        let path = solve(&b, &[0.3], &noise, 0);
        let jac = variational_jacobian(&b, &path, &grid).unwrap();
        let mut expect = 1.0;
        for i in 0..grid.n_nodes() {
            assert!((jac[i] - expect).abs() < 1e-14);
            expect *= 1.0 - grid.dt();
        }
        let s = second_variation(&b, &path, &jac, &grid).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        assert!(variational_jacobian(&ZeroDrift { dim: 1 }, &[0.0; 5], &grid).is_err());
    }

    #[test]
    fn picard_first_order_and_scalar_exponential() {
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let noise = sample_wiener(grid, 1, 1, 5).unwrap();
        let b = moll(1);
        let path = solve(&b, &[0.0], &noise, 0);
        let mut a = [0.0];
        let mut cum = vec![0.0];
        let mut integral = 0.0;
        for i in 0..grid.n_steps() {
            b.jacobian(grid.node(i), &path[i..i + 1], &mut a).unwrap();
            integral += a[0] * grid.dt();
            cum.push(integral);
        }
        let p1 = picard_jacobian(&b, &path, &grid, 1).unwrap();
        let first: Vec<f64> = cum.iter().map(|c| 1.0 + c).collect();
        assert!(rel(&p1, &first) < 1e-12);
        let p30 = picard_jacobian(&b, &path, &grid, 30).unwrap();
        let exp: Vec<f64> = cum.iter().map(|c| c.exp()).collect();
        assert!(rel(&p30, &exp) < 1e-13);
    }

    #[test]
    fn picard_converges_to_variational() {
        let grid = TimeGrid::new(1.0, 2048).unwrap();
        let noise = sample_fbm_circulant(HurstParam::new(0.3).unwrap(), grid, 2, 1, 6).unwrap();
        let b = moll(2);
        let path = solve(&b, &[0.1, -0.2], &noise, 0);
        let var = variational_jacobian(&b, &path, &grid).unwrap();
        let c = grid.t_end() * max_drift_jacobian_norm(&b, &path, &grid).unwrap();
        let m_star = picard_order_for(c, 1e-6);
        // Floor: exact step exponentials vs Euler steps, O(Δt).
        let floor = rel(&picard_jacobian(&b, &path, &grid, m_star + 10).unwrap(), &var);
        let mut prev = f64::INFINITY;
        for m in 1..=m_star {
            let err = rel(&picard_jacobian(&b, &path, &grid, m).unwrap(), &var);
            if prev > 2.0 * floor {
                assert!(err <= prev, "m={m}: {err} > {prev}");
            }
            prev = err;
        }
        assert!(prev < 1e-4, "{prev}");
    }

    #[test]
    fn variational_matches_finite_difference() {
        for d in [1usize, 2] {
            let grid = TimeGrid::new(1.0, 128).unwrap();
            let noise = sample_fbm_circulant(HurstParam::new(0.3).unwrap(), grid, d, 8, 7).unwrap();
            let b = moll(d);
            let x = vec![0.05; d];
            let node = grid.n_steps();
            let v1 = variational_per_path(&b, &noise, &x, 1, node).unwrap();
            let (f1, warn) = finite_diff_per_path(&b, &noise, &x, 1e-4, 1, node).unwrap();
            assert!(!warn);
            for (a, f) in v1.iter().zip(&f1) {
                assert!(rel(f, a) < 1e-3);
            }
            let v2 = variational_per_path(&b, &noise, &x, 2, node).unwrap();
            let (f2, _) = finite_diff_per_path(&b, &noise, &x, 1e-2, 2, node).unwrap();
            for (a, f) in v2.iter().zip(&f2) {
                assert!(rel(f, a) < 5e-2);
                for r in 0..d {
                    for p in 0..d {
                        for q in 0..d {
                            let s1 = a[(r * d + p) * d + q];
                            let s2 = a[(r * d + q) * d + p];
                            assert!((s1 - s2).abs() <= 1e-14 * s1.abs().max(1.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn finite_difference_zero_drift() {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let noise = sample_wiener(grid, 2, 4, 8).unwrap();
        let b = ZeroDrift { dim: 2 };
        let e1 = finite_diff_flow::<f64>(&b, &noise, &[0.5, -0.5], 1e-4, 1, 32).unwrap();
        for (v, i) in e1.value.iter().zip([1.0f64, 0.0, 0.0, 1.0]) {
            assert!((v - i).abs() < 1e-10);
        }
        let e2 = finite_diff_flow::<f64>(&b, &noise, &[0.5, -0.5], 1e-2, 2, 32).unwrap();
        assert!(e2.value.iter().all(|v| v.abs() < 1e-10));
        let tiny = finite_diff_flow(&b, &noise, &[0.5, -0.5], 1e-15, 1, 32).unwrap();
        assert!(tiny.cancellation_warning);
        assert!(finite_diff_flow(&b, &noise, &[0.5, -0.5], 1e-4, 3, 32).is_err());
    }

    #[test]
    fn finite_difference_richardson() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let noise = sample_wiener(grid, 1, 1, 9).unwrap();
        let b = moll(1);
        let exact = variational_per_path(&b, &noise, &[0.1], 1, 64).unwrap()[0][0];
        let fd = |h: f64| finite_diff_per_path(&b, &noise, &[0.1], h, 1, 64).unwrap().0[0][0];
        let e1 = (fd(0.2) - exact).abs();
        let e2 = (fd(0.1) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn zero_alpha_moment_table() {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let h = HurstParam::new(0.1).unwrap();
        let noise = sample_fbm_circulant(h, grid, 1, 16, 10).unwrap();
        let cfg = SkewConfig::new(0.0, vec![0.0], h, grid, 4).unwrap();
        let xs = vec![vec![-1.0], vec![0.0], vec![1.0]];
        for (k, want) in [(1usize, 1.0), (2, 0.0)] {
            let rows = moment_table(&cfg, &[4, 16], 3.0, k, &xs, &noise).unwrap();
            assert_eq!(rows.len(), 6);
            for r in rows {
                assert_eq!(r.estimate, want);
                assert_eq!(r.l1_norm, 0.0);
            }
        }
        let cfg = SkewConfig::new(-2.0, vec![0.0, 0.0], h, grid, 4).unwrap();
        assert!((cfg.drift().l1_norm() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_flow_sobolev() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let noise = sample_wiener(grid, 1, 2000, 11).unwrap();
        let b = ZeroDrift { dim: 1 };
        let s = sample_flow_box(&b, &noise, &[0.0], &[1.0], 17, 1, 16).unwrap();
        let est = sobolev_norm_estimate(&s, 1, 2.0).unwrap();
        // ∫_0^1 E(x + B_1)² dx = 1/3 + m1 + m2 with sample moments m1, m2.
        let bt = noise.cross_section(16, 0);
        let m1 = bt.iter().sum::<f64>() / bt.len() as f64;
        let m2 = bt.iter().map(|v| v * v).sum::<f64>() / bt.len() as f64;
        assert!((est.per_order[0] - (1.0 / 3.0 + m1 + m2)).abs() < 1e-12);
        assert!((est.per_order[1] - 1.0).abs() < 1e-14);
        let e0 = sobolev_norm_estimate(&s, 0, 2.0).unwrap();
        assert!(e0.estimate <= est.estimate);
        assert!(sobolev_norm_estimate(&s, 2, 2.0).is_err());
        assert!(sobolev_norm_estimate(&s, 1, 1.5).is_err());
    }

    #[test]
    fn sobolev_refinement() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let noise = sample_fbm_circulant(HurstParam::new(0.2).unwrap(), grid, 1, 200, 12).unwrap();
        let b = moll(1);
        let coarse = sample_flow_box(&b, &noise, &[-1.0], &[1.0], 17, 2, 64).unwrap();
        let fine = sample_flow_box(&b, &noise, &[-1.0], &[1.0], 33, 2, 64).unwrap();
        let ec = sobolev_norm_estimate(&coarse, 2, 4.0).unwrap().estimate;
        let ef = sobolev_norm_estimate(&fine, 2, 4.0).unwrap().estimate;
        assert!(((ec - ef) / ef).abs() < 0.02);
    }
}
