use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::batch::{PathBatch, PathKind};
use super::grid::{HurstParam, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximum number of embedding doublings tried before giving up.
pub const MAX_DOUBLINGS: u32 = 6;

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
fn fgn_autocov<T: Scalar>(h: T, k: usize) -> T {
    let e = h + h;
    let kf = T::of_usize(k);
    let pw = |x: T| if x == T::zero() { T::zero() } else { x.powf(e) };
    T::of(0.5) * (pw(kf + T::one()) - T::of(2.0) * pw(kf) + pw((kf - T::one()).abs()))
}

/// Square roots of the scaled circulant eigenvalues, `sqrt(λ_j / M)`.
pub(crate) struct Embedding<T: Scalar> {
    pub size: usize,
    pub sqrt_eig: Vec<T>,
    pub fft: Arc<dyn Fft<T>>,
}

pub(crate) fn embed<T: Scalar>(h: T, n: usize) -> Result<Embedding<T>> {
    let mut half = n.next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let mut last_min = 0.0;
    for _ in 0..=MAX_DOUBLINGS {
        let m = 2 * half;
        let mut row: Vec<Complex<T>> = (0..m)
            .map(|j| {
                let lag = if j <= half { j } else { m - j };
                Complex::new(fgn_autocov(h, lag), T::zero())
            })
            .collect();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(T::zero(), T::max);
        let min = row.iter().map(|c| c.re).fold(T::infinity(), T::min);
        last_min = min.as_f64();
        // round-off sized negatives are clamped
        if min >= -T::of(1e-10) * max {
            let scale = T::of_usize(m).recip();
            let sqrt_eig = row.iter().map(|c| (c.re.max(T::zero()) * scale).sqrt()).collect();
            return Ok(Embedding { size: m, sqrt_eig, fft });
        }
        half *= 2;
    }
    Err(Error::NegativeEigenvalue { min: last_min, size: half })
}

/// Exact fBm sampler by circulant embedding of fractional Gaussian noise
/// (Davies–Harte). One complex FFT yields two independent components: the
/// real and imaginary parts.
pub fn sample_fbm_circulant<T: Scalar>(
    h: HurstParam<T>,
    grid: TimeGrid<T>,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<PathBatch<T>> {
    let n = grid.n_steps();
    let emb = embed(h.h(), n)?;
    let m = emb.size;
    let scale = grid.dt().powf(h.h());
    PathBatch::generate_with(
        dim,
        grid,
        count,
        seed,
        PathKind::FractionalBrownian,
        "circulant",
        || {
            let buf = vec![Complex::new(T::zero(), T::zero()); m];
            let scratch = vec![Complex::new(T::zero(), T::zero()); emb.fft.get_inplace_scratch_len()];
            (buf, scratch)
        },
        |(buf, scratch), stream, out| {
            for c in 0..dim {
                out[c] = T::zero();
            }
            for pair in (0..dim).step_by(2) {
                for (b, &s) in buf.iter_mut().zip(&emb.sqrt_eig) {
                    let re = T::of(stream.normal());
                    let im = T::of(stream.normal());
                    *b = Complex::new(s * re, s * im);
                }
                emb.fft.process_with_scratch(buf, scratch);
                let (mut acc_re, mut acc_im) = (T::zero(), T::zero());
                for i in 0..n {
                    acc_re = acc_re + buf[i].re * scale;
                    acc_im = acc_im + buf[i].im * scale;
                    out[(i + 1) * dim + pair] = acc_re;
                    if pair + 1 < dim {
                        out[(i + 1) * dim + pair + 1] = acc_im;
                    }
                }
            }
        },
    )
    .map(|b| b.with_hurst(h.h()))
}
