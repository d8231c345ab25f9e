use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Hurst exponent `h ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstParam<T>(T);

impl<T: Scalar> HurstParam<T> {
    pub fn new(h: T) -> Result<Self> {
        if h > T::zero() && h < T::one() {
            Ok(Self(h))
        } else {
            Err(domain(format!("Hurst exponent must lie in (0, 1), got {h}")))
        }
    }

    pub fn h(self) -> T {
        self.0
    }

    /// `h < 1/2`, the rough regime where the kernel operators apply.
    pub fn strict_low(self) -> bool {
        self.0 < T::of(0.5)
    }

    pub fn is_brownian(self) -> bool {
        self.0 == T::of(0.5)
    }
}

/// Uniform grid `t_i = i T / n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_end: T,
    n_steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t_end: T, n_steps: usize) -> Result<Self> {
        if !(t_end > T::zero()) || !t_end.is_finite() {
            return Err(domain(format!("time horizon must be positive, got {t_end}")));
        }
        if n_steps == 0 {
            return Err(domain("time grid needs at least one step"));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> T {
        self.t_end / T::of_usize(self.n_steps)
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.n_steps {
            self.t_end
        } else {
            self.dt() * T::of_usize(i)
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.n_steps).map(|i| self.node(i)).collect()
    }
}

/// `R_H(t, s) = ½(t^{2H} + s^{2H} − |t − s|^{2H})`.
pub fn fbm_covariance<T: Scalar>(h: HurstParam<T>, t: T, s: T) -> Result<T> {
    if t < T::zero() || s < T::zero() {
        return Err(domain(format!("covariance needs non-negative times, got ({t}, {s})")));
    }
    Ok(covariance_unchecked(h.h(), t, s))
}

pub(crate) fn covariance_unchecked<T: Scalar>(h: T, t: T, s: T) -> T {
    let e = h + h;
    let pw = |x: T| if x == T::zero() { T::zero() } else { x.powf(e) };
    T::of(0.5) * (pw(t) + pw(s) - pw((t - s).abs()))
}
