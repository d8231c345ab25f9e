//! Small dense tensor helpers on row-major slices.

use crate::scalar::Scalar;

pub(crate) fn identity<T: Scalar>(d: usize) -> Vec<T> {
    let mut m = vec![T::zero(); d * d];
    for i in 0..d {
        m[i * d + i] = T::one();
    }
    m
}

/// `out = a · b` for `d × d` matrices.
pub(crate) fn matmul<T: Scalar>(a: &[T], b: &[T], d: usize, out: &mut [T]) {
    for i in 0..d {
        for j in 0..d {
            let mut acc = T::zero();
            for k in 0..d {
                acc = acc + a[i * d + k] * b[k * d + j];
            }
            out[i * d + j] = acc;
        }
    }
}

/// Euclidean norm of a vector.
pub fn vector_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Operator norm induced by the max-norm: largest absolute row sum.
pub fn matrix_norm<T: Scalar>(m: &[T], d: usize) -> T {
    (0..d)
        .map(|r| m[r * d..(r + 1) * d].iter().fold(T::zero(), |acc, &x| acc + x.abs()))
        .fold(T::zero(), T::max)
}

/// Norm of a bilinear map `S[r][a][b]` induced by the max-norm:
/// `max_r Σ_{a,b} |S_rab|`.
pub fn tensor3_norm<T: Scalar>(s: &[T], d: usize) -> T {
    (0..d)
        .map(|r| s[r * d * d..(r + 1) * d * d].iter().fold(T::zero(), |acc, &x| acc + x.abs()))
        .fold(T::zero(), T::max)
}
