use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Values of a scalar function on the uniform grid `a = x_0 < … < x_{n-1} = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    a: T,
    b: T,
    values: Vec<T>,
}

impl<T: Scalar> SampledFunction<T> {
    pub fn new(a: T, b: T, values: Vec<T>) -> Result<Self> {
        if !(a < b) {
            return Err(domain(format!("interval needs a < b, got [{a}, {b}]")));
        }
        if values.len() < 2 {
            return Err(domain("a sampled function needs at least two nodes"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("sample {i} is not finite")));
        }
        Ok(Self { a, b, values })
    }

    /// Samples `f` on `n` uniform nodes of `[a, b]`.
    pub fn from_fn(a: T, b: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        if n < 2 {
            return Err(domain("a sampled function needs at least two nodes"));
        }
        let h = (b - a) / T::of_usize(n - 1);
        let values = (0..n).map(|i| f(node(a, b, h, i, n))).collect();
        Self::new(a, b, values)
    }

    /// Builds without re-validating; callers guarantee the invariants.
    pub(crate) fn from_parts(a: T, b: T, values: Vec<T>) -> Self {
        debug_assert!(a < b && values.len() >= 2);
        Self { a, b, values }
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn step(&self) -> T {
        (self.b - self.a) / T::of_usize(self.len() - 1)
    }

    pub fn x(&self, i: usize) -> T {
        node(self.a, self.b, self.step(), i, self.len())
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                self.len(),
                values.len()
            )));
        }
        Self::new(self.a, self.b, values)
    }

    /// Pointwise `g(x_i, f(x_i))` on the same grid.
    pub fn map_with_x(&self, g: impl Fn(T, T) -> T) -> Self {
        let h = self.step();
        let n = self.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| g(node(self.a, self.b, h, i, n), v))
            .collect();
        Self::from_parts(self.a, self.b, values)
    }

    /// `f(a + b - x)` on the same grid.
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self::from_parts(self.a, self.b, values)
    }

    /// `c1 * self + c2 * other`.
    pub fn combine(&self, c1: T, other: &Self, c2: T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| c1 * x + c2 * y).collect();
        Ok(Self::from_parts(self.a, self.b, values))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || self.a != other.a || self.b != other.b {
            return Err(Error::GridMismatch(format!(
                "[{}, {}] with {} nodes vs [{}, {}] with {} nodes",
                self.a,
                self.b,
                self.len(),
                other.a,
                other.b,
                other.len()
            )));
        }
        Ok(())
    }

    /// Relative discrete L² distance `‖self − reference‖ / ‖reference‖`.
    pub fn rel_l2_error(&self, reference: &Self) -> Result<T> {
        self.check_same_grid(reference)?;
        Ok(rel_l2(&self.values, &reference.values))
    }
}

fn node<T: Scalar>(a: T, b: T, h: T, i: usize, n: usize) -> T {
    if i + 1 == n {
        b
    } else {
        a + h * T::of_usize(i)
    }
}

/// Relative discrete L² distance between two equally long sequences.
pub fn rel_l2<T: Scalar>(approx: &[T], reference: &[T]) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    for (&x, &y) in approx.iter().zip(reference) {
        num = num + (x - y) * (x - y);
        den = den + y * y;
    }
    (num / den).sqrt()
}

/// Fractional order `α ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder<T>(T);

impl<T: Scalar> FracOrder<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha > T::zero() && alpha <= T::one() {
            Ok(Self(alpha))
        } else {
            Err(domain(format!("fractional order must lie in (0, 1], got {alpha}")))
        }
    }

    pub fn alpha(self) -> T {
        self.0
    }
}
