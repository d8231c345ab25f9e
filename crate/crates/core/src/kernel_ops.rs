//! The Volterra kernel `K_H` of fractional Brownian motion (`H < 1/2`), its
//! adjoint `K_H*`, the operator `K_H` and its inverse on absolutely
//! continuous inputs.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fbm::{HurstParam, PathBatch, PathKind, TimeGrid};
use crate::frac_calc::{beta_fn, gamma, rl_derivative_left_raw, rl_integral_left_raw, SampledFunction};
use crate::quad::{adaptive_gk, GaussRule};
use crate::scalar::Scalar;

fn require_rough<T: Scalar>(h: HurstParam<T>) -> Result<T> {
    if h.strict_low() {
        Ok(h.h())
    } else {
        Err(domain(format!("kernel operators need h < 1/2, got {}", h.h())))
    }
}

fn require_up_to_half<T: Scalar>(h: HurstParam<T>) -> Result<T> {
    if h.h() <= T::of(0.5) {
        Ok(h.h())
    } else {
        Err(domain(format!("operator needs h ≤ 1/2, got {}", h.h())))
    }
}

/// `c_H = sqrt(2H / ((1 − 2H) B(1 − 2H, H + 1/2)))`.
pub fn c_h<T: Scalar>(h: HurstParam<T>) -> Result<T> {
    let h = require_rough(h)?;
    let one = T::one();
    let two_h = h + h;
    let b = beta_fn(one - two_h, h + T::of(0.5))?;
    Ok((two_h / ((one - two_h) * b)).sqrt())
}

/// `∫_s^t u^{H−3/2}(u−s)^{H−1/2} du`.
///
/// With `u = s w` this is `s^{2H−1} ∫_1^{t/s} w^{H−3/2}(w−1)^{H−1/2} dw`. The
/// piece on `[1, min(t/s, 2)]` uses `v = (w−1)^{H+1/2}`; the remainder uses
/// `w = 1/z`, `z = y^{1/(1−2H)}`, after which both integrands are bounded.
fn inner_integral<T: Scalar>(h: T, s: T, t: T) -> T {
    let one = T::one();
    let half = T::of(0.5);
    let tol = T::of(1e-14);
    let rtol = T::of(1e-12);
    let r = t / s;
    let q = h + half;
    let inv_q = q.recip();
    let near_end = r.min(T::of(2.0));
    let near = adaptive_gk(|v: T| (one + v.powf(inv_q)).powf(h - T::of(1.5)), T::zero(), (near_end - one).powf(q), tol, rtol) * inv_q;
    let mut total = near;
    if r > T::of(2.0) {
        let c = one - h - h;
        let inv_c = c.recip();
        let far = adaptive_gk(
            |y: T| (one - y.powf(inv_c)).powf(h - half),
            r.recip().powf(c),
            half.powf(c),
            tol,
            rtol,
        ) * inv_c;
        total = total + far;
    }
    s.powf(h + h - one) * total
}

fn kernel_unchecked<T: Scalar>(h: T, ch: T, t: T, s: T) -> T {
    let e = h - T::of(0.5);
    let first = (t / s).powf(e) * (t - s).powf(e);
    let second = (T::of(0.5) - h) * s.powf(-e) * inner_integral(h, s, t);
    ch * (first + second)
}

/// `K_H(t, s)` for `0 < s < t`.
pub fn kh_kernel<T: Scalar>(h: HurstParam<T>, t: T, s: T) -> Result<T> {
    let ch = c_h(h)?;
    if !(s > T::zero() && s < t) {
        return Err(domain(format!("kernel needs 0 < s < t, got t={t}, s={s}")));
    }
    Ok(kernel_unchecked(h.h(), ch, t, s))
}

/// `∫_0^{t∧s} K_H(t,u) K_H(s,u) du`, which equals `R_H(t, s)`.
///
/// The interval is split at its midpoint and `u = v^{1/(2H)}` (resp.
/// `m − u = v^{1/(2H)}`) removes the power singularities at both ends.
pub fn kernel_product_integral<T: Scalar>(h: HurstParam<T>, t: T, s: T) -> Result<T> {
    let ch = c_h(h)?;
    if !(t > T::zero() && s > T::zero()) {
        return Err(domain(format!("factorization needs positive times, got ({t}, {s})")));
    }
    let hh = h.h();
    let m = t.min(s);
    let p = (hh + hh).recip();
    let k = |u: T| {
        let kt = if u < t { kernel_unchecked(hh, ch, t, u) } else { T::zero() };
        let ks = if u < s { kernel_unchecked(hh, ch, s, u) } else { T::zero() };
        kt * ks
    };
    let half = m * T::of(0.5);
    let vmax = half.powf(hh + hh);
    let tol = T::of(1e-9);
    let lower = adaptive_gk(|v: T| if v > T::zero() { k(v.powf(p)) * p * v.powf(p - T::one()) } else { T::zero() }, T::zero(), vmax, tol, tol);
    let upper = adaptive_gk(
        |v: T| if v > T::zero() { k(m - v.powf(p)) * p * v.powf(p - T::one()) } else { T::zero() },
        T::zero(),
        vmax,
        tol,
        tol,
    );
    Ok(lower + upper)
}

/// `x^e` at grid node `i` (step `step`). At `x = 0` a negative exponent is
/// replaced by the mean of `x^e` over the half cell `[0, step/2]`.
pub(crate) fn power_weight<T: Scalar>(i: usize, step: T, e: T) -> T {
    if i > 0 {
        (step * T::of_usize(i)).powf(e)
    } else if e < T::zero() {
        (step * T::of(0.5)).powf(e) / (T::one() + e)
    } else if e == T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

fn weighted<T: Scalar>(values: &[T], step: T, e: T) -> Vec<T> {
    values.iter().enumerate().map(|(i, &v)| v * power_weight(i, step, e)).collect()
}

fn interior<T: Scalar>(f: &SampledFunction<T>, values: Vec<T>) -> Result<SampledFunction<T>> {
    let n = f.len();
    if n < 4 {
        return Err(domain("kernel operators need at least four grid nodes"));
    }
    SampledFunction::new(f.x(1), f.x(n - 2), values[1..n - 1].to_vec())
}

fn check_origin<T: Scalar>(f: &SampledFunction<T>) -> Result<()> {
    if f.a() != T::zero() {
        return Err(domain(format!("kernel operators act on [0, T], got start {}", f.a())));
    }
    Ok(())
}

/// Marchaud right-sided derivative on raw samples.
fn right_derivative_raw<T: Scalar>(values: &[T], step: T, alpha: T) -> Vec<T> {
    let mut rev = values.to_vec();
    rev.reverse();
    let mut d = rl_derivative_left_raw(&rev, step, alpha);
    d.reverse();
    d
}

/// `K_H* φ (s) = c_H Γ(H+1/2) s^{1/2−H} (D^{1/2−H}_{T−} u^{H−1/2} φ(u))(s)`,
/// reported on the interior nodes only.
pub fn kh_star<T: Scalar>(h: HurstParam<T>, phi: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    let hh = require_rough(h)?;
    check_origin(phi)?;
    let ch = c_h(h)?;
    let e = hh - T::of(0.5);
    let step = phi.step();
    let psi = weighted(phi.values(), step, e);
    let d = right_derivative_raw(&psi, step, -e);
    let pre = ch * gamma(hh + T::of(0.5));
    let out = d.iter().enumerate().map(|(i, &v)| pre * power_weight(i, step, -e) * v).collect();
    interior(phi, out)
}

/// Second representation of `K_H*`:
/// `c_H Γ(H+1/2) D^{1/2−H}_{T−}φ(s) + c_H (1/2−H) ∫_s^T φ(t)(t−s)^{H−3/2}(1−(t/s)^{H−1/2}) dt`,
/// with `φ` interpolated linearly. Interior nodes only.
pub fn kh_star_integral_form<T: Scalar>(h: HurstParam<T>, phi: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    let hh = require_rough(h)?;
    check_origin(phi)?;
    let ch = c_h(h)?;
    let e = hh - T::of(0.5);
    let step = phi.step();
    let n = phi.len();
    let f = phi.values();
    let d = right_derivative_raw(f, step, -e);
    let rule = GaussRule::<T>::new(10);
    let q = hh + T::of(0.5);
    let inv_q = q.recip();
    let lin = |k: usize, t: T| {
        let x0 = step * T::of_usize(k);
        let w = (t - x0) / step;
        f[k] * (T::one() - w) + f[k + 1] * w
    };
    let out: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i == 0 || i + 1 >= n {
                return T::zero();
            }
            let s = step * T::of_usize(i);
            // (1 − (t/s)^{e}) / (t − s), bounded at t = s
            let ratio = |t: T| {
                let r = t - s;
                -(e * (r / s).ln_1p()).exp_m1() / r
            };
            // first cell: v = (t−s)^{H+1/2} turns (t−s)^{H−3/2} dt into (t−s)^{−1} dv / q
            let first = rule.integrate(
                |v: T| {
                    let r = v.powf(inv_q);
                    lin(i, s + r) * ratio(s + r)
                },
                T::zero(),
                step.powf(q),
            ) * inv_q;
            let mut acc = first;
            for k in (i + 1)..(n - 1) {
                let a = step * T::of_usize(k);
                acc = acc
                    + rule.integrate(
                        |t: T| {
                            let r = t - s;
                            lin(k, t) * r.powf(e) * ratio(t)
                        },
                        a,
                        a + step,
                    );
            }
            ch * gamma(q) * d[i] + ch * (T::of(0.5) - hh) * acc
        })
        .collect();
    interior(phi, out)
}

/// `K_H φ = I^{2H}_{0+} s^{1/2−H} I^{1/2−H}_{0+} s^{H−1/2} φ` on the full grid.
/// At `h = 1/2` this is the running integral.
pub fn kh_operator<T: Scalar>(h: HurstParam<T>, phi: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    let hh = require_up_to_half(h)?;
    check_origin(phi)?;
    let step = phi.step();
    let inner = inner_operator(phi.values(), step, hh);
    let out = rl_integral_left_raw(&inner, step, hh + hh);
    Ok(SampledFunction::from_parts(phi.a(), phi.b(), out))
}

/// `s^{1/2−H} I^{1/2−H} s^{H−1/2} φ`, the factor inside `K_H` after `I^{2H}`.
pub(crate) fn inner_operator<T: Scalar>(values: &[T], step: T, h: T) -> Vec<T> {
    let e = h - T::of(0.5);
    if e == T::zero() {
        return values.to_vec();
    }
    let w = weighted(values, step, e);
    let i = rl_integral_left_raw(&w, step, -e);
    weighted(&i, step, -e)
}

/// `(K_H φ)' = D^{1−2H}[s^{1/2−H} I^{1/2−H} s^{H−1/2} φ]`, the derivative
/// of [`kh_operator`] expressed without numerical differencing.
pub fn kh_operator_derivative<T: Scalar>(h: HurstParam<T>, phi: &SampledFunction<T>) -> Result<SampledFunction<T>> {
    let hh = require_rough(h)?;
    check_origin(phi)?;
    let step = phi.step();
    let inner = inner_operator(phi.values(), step, hh);
    let out = rl_derivative_left_raw(&inner, step, T::one() - hh - hh);
    Ok(SampledFunction::from_parts(phi.a(), phi.b(), out))
}

/// `K_H^{-1} φ` on the full grid from the samples of `φ'`. Node 0 holds the
/// limit value: 0 for `H < 1/2`, `φ'(0)` for `H = 1/2`.
pub(crate) fn kh_inverse_full<T: Scalar>(h: T, phi_prime: &[T], step: T) -> Vec<T> {
    let e = h - T::of(0.5);
    if e == T::zero() {
        return phi_prime.to_vec();
    }
    let w = weighted(phi_prime, step, -e);
    let i = rl_integral_left_raw(&w, step, -e);
    let mut out = weighted(&i, step, e);
    out[0] = T::zero();
    out
}

/// `K_H^{-1} φ (s) = s^{H−1/2} I^{1/2−H}_{0+} s^{1/2−H} φ'(s)` for absolutely
/// continuous `φ`; interior nodes only.
pub fn kh_inverse<T: Scalar>(
    h: HurstParam<T>,
    phi: &SampledFunction<T>,
    phi_prime: Option<&SampledFunction<T>>,
) -> Result<SampledFunction<T>> {
    let hh = require_up_to_half(h)?;
    check_origin(phi)?;
    let dphi = phi_prime.ok_or(Error::MissingDerivative("kh_inverse needs samples of the derivative of its input"))?;
    phi.check_same_grid(dphi)?;
    let out = kh_inverse_full(hh, dphi.values(), phi.step());
    interior(phi, out)
}

/// Lower-triangular Volterra weights on the unit grid, packed by row.
/// Row `r` (node `t = r + 1`) holds `r + 1` entries.
#[derive(Debug)]
pub struct UnitVolterra {
    n: usize,
    weights: Vec<f64>,
    raw_variance_ratio: Vec<f64>,
}

impl UnitVolterra {
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let start = r * (r + 1) / 2;
        &self.weights[start..start + r + 1]
    }

    /// `Σ_j K(i, j+1/2)² / i^{2H}` before renormalization, per row.
    pub fn raw_variance_ratio(&self) -> &[f64] {
        &self.raw_variance_ratio
    }
}

fn build_unit_volterra(h: f64, n: usize) -> UnitVolterra {
    if h == 0.5 {
        let weights = vec![1.0; n * (n + 1) / 2];
        return UnitVolterra { n, weights, raw_variance_ratio: vec![1.0; n] };
    }
    let ch = c_h(HurstParam::new(h).expect("validated")).expect("h < 1/2");
    let e = h - 0.5;
    let rule = GaussRule::<f64>::new(12);
    // column j: kernel at s = j + 1/2 for t = j+1 ..= n
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let s = j as f64 + 0.5;
            let mut inner = inner_integral(h, s, s + 0.5);
            let mut col = Vec::with_capacity(n - j);
            for i in (j + 1)..=n {
                let t = i as f64;
                if i > j + 1 {
                    let lo = t - 1.0;
                    inner += rule.integrate(|u: f64| u.powf(h - 1.5) * (u - s).powf(e), lo, t);
                }
                col.push(ch * ((t / s).powf(e) * (t - s).powf(e) + (0.5 - h) * s.powf(-e) * inner));
            }
            col
        })
        .collect();
    let mut weights = vec![0.0; n * (n + 1) / 2];
    let mut raw_variance_ratio = vec![0.0; n];
    for r in 0..n {
        let start = r * (r + 1) / 2;
        let mut sq = 0.0;
        for j in 0..=r {
            let k = columns[j][r - j];
            weights[start + j] = k;
            sq += k * k;
        }
        let target = ((r + 1) as f64).powf(2.0 * h);
        raw_variance_ratio[r] = sq / target;
        let scale = (target / sq).sqrt();
        for w in &mut weights[start..=start + r] {
            *w *= scale;
        }
    }
    UnitVolterra { n, weights, raw_variance_ratio }
}

type VolterraCache = RwLock<HashMap<(u64, usize), Arc<UnitVolterra>>>;

/// Unit-grid Volterra weights for `(h, n)`, computed once and shared.
///
/// Entry `(i, j)` is the midpoint kernel value `K_H(i, j + 1/2)` rescaled per
/// row so that the discrete variance `Σ_j a_{ij}²` equals `i^{2H}`. On a grid
/// with step `dt` the weights scale by `dt^{H−1/2}`.
pub fn unit_volterra(h: f64, n: usize) -> Result<Arc<UnitVolterra>> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(domain(format!("Volterra representation is implemented for 0 < h ≤ 1/2, got {h}")));
    }
    static CACHE: OnceLock<VolterraCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (h.to_bits(), n);
    if let Some(m) = cache.read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(m));
    }
    let built = Arc::new(build_unit_volterra(h, n));
    let mut w = cache.write().expect("cache lock");
    Ok(Arc::clone(w.entry(key).or_insert(built)))
}

/// Recovers the driving Wiener paths from Volterra-generated fBm by forward
/// substitution against the same weights.
pub fn wiener_from_fbm<T: Scalar>(h: HurstParam<T>, bh: &PathBatch<T>) -> Result<PathBatch<T>> {
    let grid = *bh.grid();
    let n = grid.n_steps();
    let dim = bh.dim();
    if h.is_brownian() {
        return PathBatch::from_data(dim, grid, bh.count(), bh.seed(), PathKind::Wiener, "volterra-inverse", bh.data().to_vec());
    }
    let m = unit_volterra(h.h().as_f64(), n)?;
    let scale = grid.dt().powf(h.h() - T::of(0.5));
    for r in 0..n {
        let d = m.row(r)[r];
        if !(d.abs() > 1e-300) || !d.is_finite() {
            return Err(Error::SingularKernel { row: r, value: d });
        }
    }
    let stride = grid.n_nodes() * dim;
    let mut data = vec![T::zero(); stride * bh.count()];
    data.par_chunks_mut(stride).enumerate().for_each(|(p, out)| {
        let mut dw = vec![T::zero(); n];
        for c in 0..dim {
            let mut w = T::zero();
            for r in 0..n {
                let row = m.row(r);
                let mut acc = bh.value(p, r + 1, c) / scale;
                for j in 0..r {
                    acc = acc - T::of(row[j]) * dw[j];
                }
                dw[r] = acc / T::of(row[r]);
                w = w + dw[r];
                out[(r + 1) * dim + c] = w;
            }
        }
    });
    PathBatch::from_data(dim, grid, bh.count(), bh.seed(), PathKind::Wiener, "volterra-inverse", data)
}

/// `B^H(t_i) = Σ_{j<i} a_{ij} ΔW_j` with the weights of [`unit_volterra`].
pub fn sample_fbm_volterra<T: Scalar>(h: HurstParam<T>, grid: TimeGrid<T>, w: &PathBatch<T>) -> Result<PathBatch<T>> {
    if w.kind() != PathKind::Wiener {
        return Err(domain("Volterra sampler needs a batch of Wiener paths"));
    }
    w.check_same_grid(&grid)?;
    let dim = w.dim();
    if h.is_brownian() {
        return PathBatch::from_data(dim, grid, w.count(), w.seed(), PathKind::FractionalBrownian, "volterra", w.data().to_vec())
            .map(|b| b.with_hurst(h.h()));
    }
    let n = grid.n_steps();
    let m = unit_volterra(h.h().as_f64(), n)?;
    let scale = grid.dt().powf(h.h() - T::of(0.5));
    let stride = grid.n_nodes() * dim;
    let mut data = vec![T::zero(); stride * w.count()];
    data.par_chunks_mut(stride).enumerate().for_each(|(p, out)| {
        for c in 0..dim {
            let dw = w.increments(p, c);
            for r in 0..n {
                let row = m.row(r);
                let mut acc = T::zero();
                for j in 0..=r {
                    acc = acc + T::of(row[j]) * dw[j];
                }
                out[(r + 1) * dim + c] = scale * acc;
            }
        }
    });
    PathBatch::from_data(dim, grid, w.count(), w.seed(), PathKind::FractionalBrownian, "volterra", data).map(|b| b.with_hurst(h.h()))
}
