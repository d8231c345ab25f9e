use rayon::prelude::*;
use serde::Serialize;

use super::tensor::{identity, matmul, matrix_norm};
use crate::error::{domain, Error, Result};
use crate::fbm::{PathBatch, TimeGrid};
use crate::scalar::Scalar;
use crate::skew_sde::{euler_path, Drift};
use crate::stats::MeanEstimate;

fn check_path<T: Scalar>(b: &dyn Drift<T>, x_path: &[T], grid: &TimeGrid<T>) -> Result<usize> {
    let d = b.dim();
    if x_path.len() != grid.n_nodes() * d {
        return Err(Error::GridMismatch(format!(
            "path has {} values, grid and drift need {}",
            x_path.len(),
            grid.n_nodes() * d
        )));
    }
    Ok(d)
}

/// Jacobian path of the Euler flow: `J_{i+1} = J_i + Db(t_i, X_i) J_i Δt`,
/// `J_0 = I`. Output is `(n+1)·d·d`, row-major per node.
pub fn variational_jacobian<T: Scalar>(b: &dyn Drift<T>, x_path: &[T], grid: &TimeGrid<T>) -> Result<Vec<T>> {
    let d = check_path(b, x_path, grid)?;
    let dd = d * d;
    let dt = grid.dt();
    let mut out = vec![T::zero(); grid.n_nodes() * dd];
    out[..dd].copy_from_slice(&identity(d));
    let mut a = vec![T::zero(); dd];
    let mut aj = vec![T::zero(); dd];
    for i in 0..grid.n_steps() {
        b.jacobian(grid.node(i), &x_path[i * d..(i + 1) * d], &mut a)?;
        let (done, rest) = out.split_at_mut((i + 1) * dd);
        let j = &done[i * dd..];
        matmul(&a, j, d, &mut aj);
        for k in 0..dd {
            rest[k] = j[k] + aj[k] * dt;
        }
    }
    Ok(out)
}

/// Truncated series `I + Σ_{m=1}^{M} ∫_{Δ^m} Db(X_{u_1})⋯Db(X_{u_m}) du`.
///
/// Level `m` is the running integral of `Db · (level m−1)`. With `Db` frozen
/// on each step the update `P_m(t_{i+1}) = Σ_{j=0}^{m} (A_i Δt)^j / j! · P_{m−j}(t_i)`
/// is exact, so the full series is the product of step exponentials.
pub fn picard_jacobian<T: Scalar>(b: &dyn Drift<T>, x_path: &[T], grid: &TimeGrid<T>, m: usize) -> Result<Vec<T>> {
    if m == 0 {
        return Err(domain("Picard truncation order must be at least 1"));
    }
    let d = check_path(b, x_path, grid)?;
    let dd = d * d;
    let dt = grid.dt();
    let mut levels: Vec<Vec<T>> = (0..=m).map(|k| if k == 0 { identity(d) } else { vec![T::zero(); dd] }).collect();
    let mut out = vec![T::zero(); grid.n_nodes() * dd];
    out[..dd].copy_from_slice(&identity(d));
    let mut a = vec![T::zero(); dd];
    let mut powers: Vec<Vec<T>> = vec![identity(d); m + 1];
    let mut tmp = vec![T::zero(); dd];
    for i in 0..grid.n_steps() {
        b.jacobian(grid.node(i), &x_path[i * d..(i + 1) * d], &mut a)?;
        // powers[j] = (A Δt)^j / j!
        for j in 1..=m {
            matmul(&a, &powers[j - 1], d, &mut tmp);
            let scale = dt / T::of_usize(j);
            for (p, &t) in powers[j].iter_mut().zip(&tmp) {
                *p = t * scale;
            }
        }
        let mut next: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        next.push(identity(d));
        for lvl in 1..=m {
            let mut acc = levels[lvl].clone();
            for j in 1..=lvl {
                matmul(&powers[j], &levels[lvl - j], d, &mut tmp);
                for (x, &t) in acc.iter_mut().zip(&tmp) {
                    *x = *x + t;
                }
            }
            next.push(acc);
        }
        levels = next;
        let slot = &mut out[(i + 1) * dd..(i + 2) * dd];
        slot.fill(T::zero());
        for lvl in &levels {
            for (x, &v) in slot.iter_mut().zip(lvl) {
                *x = *x + v;
            }
        }
    }
    Ok(out)
}

/// Smallest `M` with `c^{M+1}/(M+1)! < tol`, where `c = T · max‖Db‖`.
pub fn picard_order_for(c: f64, tol: f64) -> usize {
    let mut term = c;
    let mut m = 0usize;
    while term >= tol {
        m += 1;
        term *= c / (m as f64 + 1.0);
        if m > 200 {
            break;
        }
    }
    m.max(1)
}

/// Largest `‖Db(t_i, X_i)‖` along a path.
pub fn max_drift_jacobian_norm<T: Scalar>(b: &dyn Drift<T>, x_path: &[T], grid: &TimeGrid<T>) -> Result<T> {
    let d = check_path(b, x_path, grid)?;
    let mut a = vec![T::zero(); d * d];
    let mut best = T::zero();
    for i in 0..grid.n_nodes() {
        b.jacobian(grid.node(i), &x_path[i * d..(i + 1) * d], &mut a)?;
        best = best.max(matrix_norm(&a, d));
    }
    Ok(best)
}

/// Second variation of the Euler flow,
/// `S_{i+1} = S_i + Δt (D²b(X_i)[J_i, J_i] + Db(X_i) S_i)`, `S_0 = 0`.
/// Output is `(n+1)·d³` with index `(r·d + a)·d + b` per node.
pub fn second_variation<T: Scalar>(b: &dyn Drift<T>, x_path: &[T], jac_path: &[T], grid: &TimeGrid<T>) -> Result<Vec<T>> {
    let d = check_path(b, x_path, grid)?;
    let dd = d * d;
    let ddd = dd * d;
    if jac_path.len() != grid.n_nodes() * dd {
        return Err(Error::GridMismatch("Jacobian path does not match the grid".into()));
    }
    let dt = grid.dt();
    let mut out = vec![T::zero(); grid.n_nodes() * ddd];
    let mut a = vec![T::zero(); dd];
    let mut hes = vec![T::zero(); ddd];
    for i in 0..grid.n_steps() {
        let x = &x_path[i * d..(i + 1) * d];
        b.jacobian(grid.node(i), x, &mut a)?;
        b.hessian(grid.node(i), x, &mut hes)?;
        let j = &jac_path[i * dd..(i + 1) * dd];
        let (done, rest) = out.split_at_mut((i + 1) * ddd);
        let s = &done[i * ddd..];
        for r in 0..d {
            for p in 0..d {
                for q in 0..d {
                    let mut acc = T::zero();
                    for l in 0..d {
                        for m in 0..d {
                            acc = acc + hes[(r * d + l) * d + m] * j[l * d + p] * j[m * d + q];
                        }
                        acc = acc + a[r * d + l] * s[(l * d + p) * d + q];
                    }
                    let idx = (r * d + p) * d + q;
                    rest[idx] = s[idx] + dt * acc;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMethod {
    Variational,
    Picard,
    FiniteDiff,
}

/// Path-averaged derivative tensor of order `k` of `x ↦ X_t^x` at one point.
#[derive(Debug, Clone, Serialize)]
pub struct FlowDerivativeEstimate<T> {
    pub order: usize,
    pub method: FlowMethod,
    pub x: Vec<T>,
    pub t: T,
    /// Rank `k + 1` tensor, flattened row-major.
    pub value: Vec<T>,
    pub stderr: Vec<T>,
    /// Set when a finite-difference stencil spread fell below the
    /// cancellation threshold `1e3 · ε_mach · |X|`.
    pub cancellation_warning: bool,
}

fn average<T: Scalar>(per_path: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let len = per_path[0].len();
    let mut value = Vec::with_capacity(len);
    let mut stderr = Vec::with_capacity(len);
    for e in 0..len {
        let col: Vec<T> = per_path.iter().map(|v| v[e]).collect();
        let est = MeanEstimate::from_samples(&col);
        value.push(est.mean);
        stderr.push(est.stderr);
    }
    (value, stderr)
}

fn solve_one<T: Scalar>(b: &dyn Drift<T>, x0: &[T], noise: &PathBatch<T>, p: usize) -> Result<Vec<T>> {
    let grid = noise.grid();
    let mut out = vec![T::zero(); grid.n_nodes() * x0.len()];
    euler_path(b, x0, noise.path(p), grid, &mut out).map_err(|step| Error::NonFinite { path: p, step })?;
    Ok(out)
}

/// Per-path derivative tensors of order 1 or 2 at node `node`, from the
/// variational equations along the Euler path started at `x`.
pub fn variational_per_path<T: Scalar>(b: &dyn Drift<T>, noise: &PathBatch<T>, x: &[T], order: usize, node: usize) -> Result<Vec<Vec<T>>> {
    if !(1..=2).contains(&order) {
        return Err(domain(format!("derivative order must be 1 or 2, got {order}")));
    }
    let d = x.len();
    let grid = *noise.grid();
    (0..noise.count())
        .into_par_iter()
        .map(|p| {
            let path = solve_one(b, x, noise, p)?;
            let jac = variational_jacobian(b, &path, &grid)?;
            if order == 1 {
                Ok(jac[node * d * d..(node + 1) * d * d].to_vec())
            } else {
                let s = second_variation(b, &path, &jac, &grid)?;
                Ok(s[node * d * d * d..(node + 1) * d * d * d].to_vec())
            }
        })
        .collect()
}

/// Path-averaged variational derivative of order 1 or 2.
pub fn variational_estimate<T: Scalar>(b: &dyn Drift<T>, noise: &PathBatch<T>, x: &[T], order: usize, node: usize) -> Result<FlowDerivativeEstimate<T>> {
    let per = variational_per_path(b, noise, x, order, node)?;
    let (value, stderr) = average(&per);
    Ok(FlowDerivativeEstimate {
        order,
        method: FlowMethod::Variational,
        x: x.to_vec(),
        t: noise.grid().node(node),
        value,
        stderr,
        cancellation_warning: false,
    })
}

/// Per-path central finite differences of the Euler flow (common noise
/// across stencil points). Returns the tensors and the cancellation flag.
pub fn finite_diff_per_path<T: Scalar>(
    b: &dyn Drift<T>,
    noise: &PathBatch<T>,
    x: &[T],
    step: T,
    order: usize,
    node: usize,
) -> Result<(Vec<Vec<T>>, bool)> {
    if !(1..=2).contains(&order) {
        return Err(domain(format!("derivative order must be 1 or 2, got {order}")));
    }
    if !(step > T::zero()) {
        return Err(domain("finite-difference step must be positive"));
    }
    let d = x.len();
    let threshold = T::of(1e3) * T::epsilon();
    let results: Result<Vec<(Vec<T>, bool)>> = (0..noise.count())
        .into_par_iter()
        .map(|p| {
            let end = |shift: &[(usize, T)]| -> Result<Vec<T>> {
                let mut x0 = x.to_vec();
                for &(a, s) in shift {
                    x0[a] = x0[a] + s;
                }
                let path = solve_one(b, &x0, noise, p)?;
                Ok(path[node * d..(node + 1) * d].to_vec())
            };
            let mut warn = false;
            let mut check = |plus: &[T], minus: &[T]| {
                for r in 0..d {
                    let scale = plus[r].abs().max(minus[r].abs());
                    if (plus[r] - minus[r]).abs() < threshold * scale {
                        warn = true;
                    }
                }
            };
            if order == 1 {
                let mut jac = vec![T::zero(); d * d];
                for a in 0..d {
                    let plus = end(&[(a, step)])?;
                    let minus = end(&[(a, -step)])?;
                    check(&plus, &minus);
                    for r in 0..d {
                        jac[r * d + a] = (plus[r] - minus[r]) / (step + step);
                    }
                }
                Ok((jac, warn))
            } else {
                let centre = end(&[])?;
                let mut s = vec![T::zero(); d * d * d];
                let h2 = step * step;
                for a in 0..d {
                    for bb in a..d {
                        let vals: Vec<T> = if a == bb {
                            let plus = end(&[(a, step)])?;
                            let minus = end(&[(a, -step)])?;
                            check(&plus, &minus);
                            (0..d).map(|r| (plus[r] - centre[r] - centre[r] + minus[r]) / h2).collect()
                        } else {
                            let pp = end(&[(a, step), (bb, step)])?;
                            let pm = end(&[(a, step), (bb, -step)])?;
                            let mp = end(&[(a, -step), (bb, step)])?;
                            let mm = end(&[(a, -step), (bb, -step)])?;
                            check(&pp, &mm);
                            (0..d).map(|r| (pp[r] - pm[r] - mp[r] + mm[r]) / (T::of(4.0) * h2)).collect()
                        };
                        for r in 0..d {
                            s[(r * d + a) * d + bb] = vals[r];
                            s[(r * d + bb) * d + a] = vals[r];
                        }
                    }
                }
                Ok((s, warn))
            }
        })
        .collect();
    let results = results?;
    let warn = results.iter().any(|r| r.1);
    Ok((results.into_iter().map(|r| r.0).collect(), warn))
}

/// Default finite-difference step for each derivative order.
pub fn default_fd_step<T: Scalar>(order: usize) -> T {
    if order == 1 {
        T::of(1e-4)
    } else {
        T::of(1e-2)
    }
}

/// Path-averaged central finite-difference derivative of order 1 or 2.
pub fn finite_diff_flow<T: Scalar>(
    b: &dyn Drift<T>,
    noise: &PathBatch<T>,
    x: &[T],
    step: T,
    order: usize,
    node: usize,
) -> Result<FlowDerivativeEstimate<T>> {
    let (per, warn) = finite_diff_per_path(b, noise, x, step, order, node)?;
    let (value, stderr) = average(&per);
    Ok(FlowDerivativeEstimate {
        order,
        method: FlowMethod::FiniteDiff,
        x: x.to_vec(),
        t: noise.grid().node(node),
        value,
        stderr,
        cancellation_warning: warn,
    })
}
