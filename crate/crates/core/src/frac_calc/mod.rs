//! Riemann–Liouville fractional integrals and derivatives on uniform grids.
//!
//! Integrals use product integration: `f` is replaced by its piecewise-linear
//! interpolant and the power kernel is integrated exactly on each cell.
//! Derivatives use the Marchaud form with the same interpolant, so that the
//! hypersingular kernel `(x-y)^{-α-1}` is also integrated exactly per cell.

mod sampled;
mod special;

pub use sampled::{rel_l2, FracOrder, SampledFunction};
pub use special::{beta_fn, gamma_fn, ln_gamma_fn};
pub(crate) use special::gamma;

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// `(k+1)^β − 2k^β + (k−1)^β` for `k ≥ 1`, without cancellation.
fn second_difference_weight<T: Scalar>(k: usize, beta: T) -> T {
    if k == 1 {
        return T::of(2.0).powf(beta) - T::of(2.0);
    }
    let kf = T::of_usize(k);
    let inv = kf.recip();
    kf.powf(beta) * ((beta * inv.ln_1p()).exp_m1() + (beta * (-inv).ln_1p()).exp_m1())
}

/// Left-sided integral on raw samples with step `h`.
pub(crate) fn rl_integral_left_raw<T: Scalar>(f: &[T], h: T, alpha: T) -> Vec<T> {
    let n = f.len();
    let beta = alpha + T::one();
    let scale = h.powf(alpha) / gamma(alpha + T::of(2.0));
    let w: Vec<T> = (0..n).map(|k| if k == 0 { T::one() } else { second_difference_weight(k, beta) }).collect();
    let mut out = vec![T::zero(); n];
    for i in 1..n {
        let fi = T::of_usize(i);
        let a0 = if i == 1 {
            alpha
        } else {
            fi.powf(alpha) * (fi * (beta * (-fi.recip()).ln_1p()).exp_m1() + T::one() + alpha)
        };
        let mut acc = a0 * f[0] + f[i];
        for j in 1..i {
            acc = acc + w[i - j] * f[j];
        }
        out[i] = scale * acc;
    }
    out
}

/// Marchaud left-sided derivative on raw samples with step `h`, `0 < α < 1`.
pub(crate) fn rl_derivative_left_raw<T: Scalar>(f: &[T], h: T, alpha: T) -> Vec<T> {
    let n = f.len();
    let one = T::one();
    let beta = one - alpha;
    // m0[k] = ∫_{k-1}^{k} v^{-α-1} dv,  n1[k] = ∫_{k-1}^{k} (v-k+1) v^{-α-1} dv
    let mut m0 = vec![T::zero(); n];
    let mut n1 = vec![T::zero(); n];
    if n > 1 {
        n1[1] = beta.recip();
    }
    for k in 2..n {
        let kf = T::of_usize(k);
        let lg = (-kf.recip()).ln_1p();
        m0[k] = kf.powf(-alpha) * (-alpha * lg).exp_m1() / alpha;
        let p = -kf.powf(beta) * (beta * lg).exp_m1() / beta;
        n1[k] = p - (kf - one) * m0[k];
    }
    let pre = gamma(one - alpha).recip();
    let hs = h.powf(-alpha);
    let mut out = vec![T::zero(); n];
    for i in 1..n {
        let fi = f[i];
        let mut acc = T::zero();
        for k in 1..=i {
            let near = f[i - k + 1];
            acc = acc + (fi - near) * m0[k] - (f[i - k] - near) * n1[k];
        }
        out[i] = pre * (fi * (T::of_usize(i) * h).powf(-alpha) + alpha * hs * acc);
    }
    out[0] = if n > 2 { T::of(2.0) * out[1] - out[2] } else { out[1] };
    out
}

/// `I^α_{a+} f`.
pub fn rl_integral_left<T: Scalar>(f: &SampledFunction<T>, alpha: FracOrder<T>) -> SampledFunction<T> {
    let v = rl_integral_left_raw(f.values(), f.step(), alpha.alpha());
    SampledFunction::from_parts(f.a(), f.b(), v)
}

/// `I^α_{b−} f`.
pub fn rl_integral_right<T: Scalar>(f: &SampledFunction<T>, alpha: FracOrder<T>) -> SampledFunction<T> {
    rl_integral_left(&f.reflect(), alpha).reflect()
}

fn check_derivative_order<T: Scalar>(alpha: FracOrder<T>) -> Result<T> {
    let a = alpha.alpha();
    if a >= T::one() {
        return Err(domain("derivative of order 1 is ordinary differencing, not a fractional derivative"));
    }
    Ok(a)
}

/// `D^α_{a+} f` in Marchaud form. The value at `x = a` is extrapolated
/// linearly from the next two nodes.
pub fn rl_derivative_left<T: Scalar>(f: &SampledFunction<T>, alpha: FracOrder<T>) -> Result<SampledFunction<T>> {
    let a = check_derivative_order(alpha)?;
    let v = rl_derivative_left_raw(f.values(), f.step(), a);
    Ok(SampledFunction::from_parts(f.a(), f.b(), v))
}

/// `D^α_{b−} f` in Marchaud form; the value at `x = b` is extrapolated.
pub fn rl_derivative_right<T: Scalar>(f: &SampledFunction<T>, alpha: FracOrder<T>) -> Result<SampledFunction<T>> {
    Ok(rl_derivative_left(&f.reflect(), alpha)?.reflect())
}
