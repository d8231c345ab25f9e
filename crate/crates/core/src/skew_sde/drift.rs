use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Gaussian density with covariance `eps · I_d` at `y`.
pub fn mollifier<T: Scalar>(y: &[T], eps: T) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(domain(format!("mollifier width must be positive, got {eps}")));
    }
    Ok(mollifier_unchecked(y, eps))
}

pub(crate) fn mollifier_unchecked<T: Scalar>(y: &[T], eps: T) -> T {
    let r2 = y.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let d = T::of_usize(y.len());
    (-(r2 / (eps + eps))).exp() / (T::of(2.0) * T::PI() * eps).powf(d * T::of(0.5))
}

/// Time- and state-dependent drift `b(t, x)` on `ℝ^d`.
///
/// Derivatives are optional; the defaults report them as unavailable.
pub trait Drift<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    fn describe(&self) -> String;

    fn eval(&self, t: T, x: &[T], out: &mut [T]);

    /// Writes `∂b_r/∂x_l` at `out[r * d + l]`.
    fn jacobian(&self, _t: T, _x: &[T], _out: &mut [T]) -> Result<()> {
        Err(Error::MissingDerivative("drift has no analytic Jacobian"))
    }

    /// Writes `∂²b_r/∂x_l∂x_m` at `out[(r * d + l) * d + m]`.
    fn hessian(&self, _t: T, _x: &[T], _out: &mut [T]) -> Result<()> {
        Err(Error::MissingDerivative("drift has no analytic second derivative"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroDrift {
    pub dim: usize,
}

impl<T: Scalar> Drift<T> for ZeroDrift {
    fn dim(&self) -> usize {
        self.dim
    }

    fn describe(&self) -> String {
        "zero".into()
    }

    fn eval(&self, _t: T, _x: &[T], out: &mut [T]) {
        out.fill(T::zero());
    }

    fn jacobian(&self, _t: T, _x: &[T], out: &mut [T]) -> Result<()> {
        out.fill(T::zero());
        Ok(())
    }

    fn hessian(&self, _t: T, _x: &[T], out: &mut [T]) -> Result<()> {
        out.fill(T::zero());
        Ok(())
    }
}

/// `b(x) = A x`, with `A` row-major `d × d`.
#[derive(Debug, Clone)]
pub struct LinearDrift<T> {
    pub matrix: Vec<T>,
    pub dim: usize,
}

impl<T: Scalar> LinearDrift<T> {
    pub fn scalar(a: T) -> Self {
        Self { matrix: vec![a], dim: 1 }
    }
}

impl<T: Scalar> Drift<T> for LinearDrift<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn describe(&self) -> String {
        "linear".into()
    }

    fn eval(&self, _t: T, x: &[T], out: &mut [T]) {
        let d = self.dim;
        for r in 0..d {
            out[r] = (0..d).fold(T::zero(), |acc, l| acc + self.matrix[r * d + l] * x[l]);
        }
    }

    fn jacobian(&self, _t: T, _x: &[T], out: &mut [T]) -> Result<()> {
        out.copy_from_slice(&self.matrix);
        Ok(())
    }

    fn hessian(&self, _t: T, _x: &[T], out: &mut [T]) -> Result<()> {
        out.fill(T::zero());
        Ok(())
    }
}

/// `b(x) = α φ_ε(x − c) 1_d`: the mollified local-time drift.
#[derive(Debug, Clone)]
pub struct MollifiedDrift<T> {
    pub alpha: T,
    pub eps: T,
    pub center: Vec<T>,
}

impl<T: Scalar> MollifiedDrift<T> {
    pub fn new(alpha: T, eps: T, dim: usize) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(domain(format!("mollifier width must be positive, got {eps}")));
        }
        if dim == 0 {
            return Err(domain("drift dimension must be at least 1"));
        }
        Ok(Self { alpha, eps, center: vec![T::zero(); dim] })
    }

    /// `‖b‖_{L¹(ℝ^d)} = |α| √d` (unit mass in each of the `d` components).
    pub fn l1_norm(&self) -> T {
        self.alpha.abs() * T::of_usize(self.center.len()).sqrt()
    }

    fn shifted(&self, x: &[T], y: &mut [T]) {
        for ((yi, &xi), &ci) in y.iter_mut().zip(x).zip(&self.center) {
            *yi = xi - ci;
        }
    }
}

impl<T: Scalar> Drift<T> for MollifiedDrift<T> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn describe(&self) -> String {
        format!("mollified(alpha={}, eps={})", self.alpha, self.eps)
    }

    fn eval(&self, _t: T, x: &[T], out: &mut [T]) {
        let r2 = x.iter().zip(&self.center).fold(T::zero(), |acc, (&xi, &ci)| acc + (xi - ci) * (xi - ci));
        let d = T::of_usize(self.center.len());
        let phi = (-(r2 / (self.eps + self.eps))).exp() / (T::of(2.0) * T::PI() * self.eps).powf(d * T::of(0.5));
        out.fill(self.alpha * phi);
    }

    fn jacobian(&self, _t: T, x: &[T], out: &mut [T]) -> Result<()> {
        let d = self.dim();
        let mut y = vec![T::zero(); d];
        self.shifted(x, &mut y);
        let phi = self.alpha * mollifier_unchecked(&y, self.eps);
        for r in 0..d {
            for l in 0..d {
                out[r * d + l] = -y[l] / self.eps * phi;
            }
        }
        Ok(())
    }

    fn hessian(&self, _t: T, x: &[T], out: &mut [T]) -> Result<()> {
        let d = self.dim();
        let mut y = vec![T::zero(); d];
        self.shifted(x, &mut y);
        let phi = self.alpha * mollifier_unchecked(&y, self.eps);
        let e2 = self.eps * self.eps;
        for r in 0..d {
            for l in 0..d {
                for m in 0..d {
                    let delta = if l == m { self.eps.recip() } else { T::zero() };
                    out[(r * d + l) * d + m] = (y[l] * y[m] / e2 - delta) * phi;
                }
            }
        }
        Ok(())
    }
}

/// Drift from a closure, without derivatives.
pub struct FnDrift<F> {
    pub dim: usize,
    pub name: String,
    pub f: F,
}

impl<T: Scalar, F: Fn(T, &[T], &mut [T]) + Sync> Drift<T> for FnDrift<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn describe(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, t: T, x: &[T], out: &mut [T]) {
        (self.f)(t, x, out)
    }
}
