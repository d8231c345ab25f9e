//! Fixed and adaptive one-dimensional quadrature shared by the operators.

use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let center = (a + b) * T::of(0.5);
    let half = (b - a) * T::of(0.5);
    let fc = f(center);
    let mut kronrod = fc * T::of(WGK[7]);
    let mut gauss = fc * T::of(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * T::of(x);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::of(w) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::of(WG[j / 2]) * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature.
///
/// Repeatedly bisects the piece with the largest Kronrod/Gauss error until
/// the summed error is below `max(abs_tol, rel_tol * |estimate|)` or the
/// subdivision budget is spent.
pub fn adaptive_gk<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> T {
    const MAX_PIECES: usize = 2000;
    struct Piece<T> {
        lo: T,
        hi: T,
        est: T,
        err: f64,
    }
    impl<T> PartialEq for Piece<T> {
        fn eq(&self, other: &Self) -> bool {
            self.err.total_cmp(&other.err).is_eq()
        }
    }
    impl<T> Eq for Piece<T> {}
    impl<T> PartialOrd for Piece<T> {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl<T> Ord for Piece<T> {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.err.total_cmp(&other.err)
        }
    }

    let (est, err) = gk15(&f, a, b);
    let mut total = est;
    let mut total_err = err.as_f64();
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Piece { lo: a, hi: b, est, err: err.as_f64() });
    while heap.len() < MAX_PIECES {
        let tol = abs_tol.as_f64().max(rel_tol.as_f64() * total.as_f64().abs());
        if total_err <= tol || !total_err.is_finite() {
            break;
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = (worst.lo + worst.hi) * T::of(0.5);
        if !(mid > worst.lo && mid < worst.hi) {
            heap.push(worst);
            break;
        }
        let (e1, r1) = gk15(&f, worst.lo, mid);
        let (e2, r2) = gk15(&f, mid, worst.hi);
        total = total - worst.est + e1 + e2;
        total_err = total_err - worst.err + r1.as_f64() + r2.as_f64();
        heap.push(Piece { lo: worst.lo, hi: mid, est: e1, err: r1.as_f64() });
        heap.push(Piece { lo: mid, hi: worst.hi, est: e2, err: r2.as_f64() });
    }
    // re-sum to shed accumulated cancellation in the running total
    heap.into_iter().fold(T::zero(), |acc, p| acc + p.est)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence in `f64`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (
        nodes.into_iter().map(T::of).collect(),
        weights.into_iter().map(T::of).collect(),
    )
}

/// Fixed Gauss–Legendre rule mapped onto `[a, b]`.
pub struct GaussRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussRule<T> {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        let c = (a + b) * T::of(0.5);
        let r = (b - a) * T::of(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(c + r * x);
        }
        acc * r
    }
}

/// Composite trapezoid rule for uniformly spaced samples.
pub fn trapezoid<T: Scalar>(values: &[T], step: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = crate::stats::pairwise_sum(&values[1..n - 1]);
            step * (inner + (values[0] + values[n - 1]) * T::of(0.5))
        }
    }
}

/// Composite Simpson weights for `n` uniform nodes (`n` odd); falls back to
/// trapezoid weights for even `n`.
pub fn simpson_weights<T: Scalar>(n: usize, step: T) -> Vec<T> {
    if n < 2 {
        return vec![T::zero(); n];
    }
    if n % 2 == 0 {
        let mut w = vec![step; n];
        w[0] = step * T::of(0.5);
        w[n - 1] = step * T::of(0.5);
        return w;
    }
    let third = step / T::of(3.0);
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                third
            } else if i % 2 == 1 {
                third * T::of(4.0)
            } else {
                third * T::of(2.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::<f64>::new(6);
        // degree 11 is the highest exact degree for six nodes
        let v = rule.integrate(|x| x.powi(11) + x.powi(10), -1.0, 1.0);
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
        let (_, w) = gauss_legendre::<f64>(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2; bisection depth bounds the attainable accuracy
        let v = adaptive_gk(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-13, 1e-12);
        assert!((v - 2.0).abs() < 1e-6, "{v}");
        let smooth = adaptive_gk(|x: f64| (5.0 * x).cos(), 0.0, 2.0, 1e-14, 1e-14);
        assert!((smooth - (10.0f64).sin() / 5.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let n = 9;
        let h = 1.0 / 8.0;
        let w = simpson_weights::<f64>(n, h);
        let v: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
        assert!((v - 0.25).abs() < 1e-15);
    }
}
