//! Shuffle permutations, iterated integrals over simplices and the
//! partial-shuffle expansion used to multiply them.

mod enumerate;
mod expectation;
mod partial;
mod simplex;

pub use enumerate::{binomial, enumerate_shuffles, inverse, ShuffleSet, SHUFFLE_BUDGET};
pub use expectation::{mc_simplex_expectation, BumpFactor, SimplexExpectation, MC_FACTOR_MAX};
pub use partial::{
    partial_shuffle_expand, total_derivative_order, verify_partial_shuffle, verify_shuffle_identity, DerivativeLedger,
    ExpandedSequence, FactorRef, IdentityCheck, MultiIndex, PartialShuffle,
};
pub use simplex::{
    simplex_monte_carlo, simplex_quadrature, Factor, SpectralSimplex, DETERMINISTIC_MAX, SPECTRAL_NODES,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::HurstParam;
    use crate::oracle::adaptive_simpson;
    use std::collections::HashSet;

    fn poly(c: &'static [f64]) -> impl Fn(f64) -> f64 + Sync {
        move |x| c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    #[test]
    fn shuffle_counts() {
        for m in 0..=6 {
            for n in 0..=(8 - m) {
                let set = enumerate_shuffles(m, n).unwrap();
                assert_eq!(set.len() as u128, binomial(m + n, m));
                let distinct: HashSet<_> = set.permutations.iter().collect();
                assert_eq!(distinct.len(), set.len());
                for s in &set.permutations {
                    assert!(s[..m].windows(2).all(|w| w[0] < w[1]));
                    assert!(s[m..].windows(2).all(|w| w[0] < w[1]));
                    let mut sorted = s.clone();
                    sorted.sort();
                    assert_eq!(sorted, (0..m + n).collect::<Vec<_>>());
                }
            }
        }
        assert_eq!(enumerate_shuffles(1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_shuffles(2, 1).unwrap().len(), 3);
        assert_eq!(enumerate_shuffles(2, 2).unwrap().len(), 6);
        assert!(enumerate_shuffles(7, 6).is_err());
    }

    #[test]
    fn simplex_volume_and_elementary() {
        let one = |_: f64| 1.0;
        for m in 0..=6 {
            let fs: Vec<Factor<f64>> = vec![&one; m];
            let v = simplex_quadrature(&fs, 0.25, 1.5).unwrap();
            let exact = 1.25f64.powi(m as i32) / (1..=m).map(|j| j as f64).product::<f64>();
            assert!((v - exact).abs() < 1e-10 * exact.max(1.0));
        }
        let id = |s: f64| s;
        let v = simplex_quadrature::<f64>(&[&id, &one], 0.0, 1.0).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_against_nested_oracle() {
        let f1 = poly(&[0.3, -1.2, 0.7]);
        let f2 = poly(&[1.0, 0.5, 0.0, -0.4]);
        let f3 = poly(&[-0.2, 2.0]);
        let (theta, t) = (0.1, 0.9);
        let v = simplex_quadrature::<f64>(&[&f1, &f2, &f3], theta, t).unwrap();
        // Outermost first: s_1 over (θ,t), s_2 over (θ,s_1), s_3 over (θ,s_2).
        let oracle = adaptive_simpson(
            &|s1| {
                f1(s1) * adaptive_simpson(&|s2| f2(s2) * adaptive_simpson(&|s3| f3(s3), theta, s2, 1e-13), theta, s1, 1e-13)
            },
            theta,
            t,
            1e-12,
        );
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn monte_carlo_simplex_agrees() {
        let f1 = poly(&[0.3, -1.2, 0.7]);
        let f2 = |s: f64| (2.0 * s).cos();
        let f3 = poly(&[1.0, 1.0]);
        let fs: Vec<Factor<f64>> = vec![&f1, &f2, &f3];
        let det = simplex_quadrature(&fs, 0.0, 1.0).unwrap();
        let mc = simplex_monte_carlo(&fs, 0.0, 1.0, 100_000, 3).unwrap();
        assert!(mc.z_score(det).abs() < 3.0);
    }

    #[test]
    fn shuffle_identity_batteries() {
        let a = poly(&[0.5, 1.0]);
        let b = poly(&[-0.3, 0.2, 0.9]);
        let r = verify_shuffle_identity::<f64>(&[&a], &[&b], 0.0, 1.0).unwrap();
        assert!(r.residual < 1e-10);
        let one = |_: f64| 1.0;
        for (m, n) in [(1, 1), (2, 3), (4, 2)] {
            let f: Vec<Factor<f64>> = vec![&one; m];
            let g: Vec<Factor<f64>> = vec![&one; n];
            let r = verify_shuffle_identity(&f, &g, 0.2, 1.3).unwrap();
            assert_eq!(r.terms as u128, binomial(m + n, m));
            assert!(r.residual < 1e-12);
        }
        let t1 = |s: f64| (3.0 * s).sin() + 0.2;
        let t2 = |s: f64| (1.7 * s).cos();
        let t3 = |s: f64| (0.5 - s).sin();
        let t4 = |s: f64| (2.2 * s + 0.3).cos() * s;
        let t5 = |s: f64| 1.0 + (5.0 * s).sin();
        let r = verify_shuffle_identity::<f64>(&[&t1, &t2], &[&t3, &t4, &t5], 0.0, 2.0).unwrap();
        assert!(r.residual < 1e-8, "{}", r.residual);
    }

    #[test]
    fn partial_shuffle_structure() {
        let f = vec![vec![1, 0], vec![0, 2], vec![1, 1]];
        let g = vec![vec![0, 1], vec![3, 0]];
        let none = partial_shuffle_expand(&f, &[], 1).unwrap();
        assert_eq!(none.sequences.len(), 1);
        assert_eq!(none.sequences[0].slots, vec![FactorRef::F(0), FactorRef::F(1), FactorRef::F(2)]);
        for k in 0..=3 {
            let e = partial_shuffle_expand(&f, &g, k).unwrap();
            assert_eq!(e.sequences.len() as u128, binomial(3 - k + 2, 2));
            let fl = DerivativeLedger::new(f.clone());
            let gl = DerivativeLedger::new(g.clone());
            for s in &e.sequences {
                assert_eq!(s.ledger.total(), total_derivative_order(&fl, &gl));
                assert_eq!(&s.slots[..k], &(0..k).map(FactorRef::F).collect::<Vec<_>>()[..]);
            }
        }
        assert!(partial_shuffle_expand(&f, &g, 4).is_err());
    }

    #[test]
    fn ledger_totals() {
        let f = DerivativeLedger::new(vec![vec![1]; 4]);
        let g = DerivativeLedger::new(vec![vec![1]; 3]);
        assert_eq!(total_derivative_order(&f, &DerivativeLedger::default()), 4);
        assert_eq!(total_derivative_order(&f, &g), 7);
        let mixed = DerivativeLedger::new(vec![vec![1, 0, 2], vec![0, 3, 1], vec![2, 2, 0]]);
        let flat: u64 = [1, 0, 2, 0, 3, 1, 2, 2, 0].iter().sum();
        assert_eq!(mixed.total(), flat);
        assert_eq!(mixed.per_coordinate(), vec![3, 5, 3]);
        assert_eq!(mixed.concat(&g).total(), flat + 3);
    }

    #[test]
    fn partial_shuffle_numeric() {
        let f1 = poly(&[0.5, 1.0]);
        let f2 = poly(&[-0.3, 0.2, 0.9]);
        let g1 = poly(&[1.0, -0.7]);
        let g2 = poly(&[0.1, 0.0, 1.1]);
        for k in 0..=2 {
            let r = verify_partial_shuffle::<f64>(&[&f1, &f2], &[&g1, &g2], k, 0.0, 1.0).unwrap();
            assert!(r.residual < 1e-8, "k={k}: {}", r.residual);
        }
        let f3 = poly(&[0.2, 0.4]);
        let r = verify_partial_shuffle::<f64>(&[&f1, &f2, &f3], &[&g1, &g2], 2, 0.1, 1.2).unwrap();
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn bump_derivatives() {
        let f = BumpFactor::new(1.3, vec![0.2, -0.1], 0.7, vec![0, 0]).unwrap();
        for (a, b) in [(1u32, 0u32), (0, 2), (2, 1)] {
            let d = BumpFactor::new(1.3, vec![0.2, -0.1], 0.7, vec![a, b]).unwrap();
            let z = [0.4, 0.3];
            let h = 1e-3;
            // Central differences of the underived bump.
            let fd = |z0: f64, z1: f64, a: u32, b: u32| -> f64 {
                let dx = |g: &dyn Fn(f64) -> f64, x: f64, n: u32| match n {
                    0 => g(x),
                    1 => (g(x + h) - g(x - h)) / (2.0 * h),
                    _ => (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h),
                };
                dx(&|x| dx(&|y| f.eval(&[x, y]), z1, b), z0, a)
            };
            let want = fd(z[0], z[1], a, b);
            assert!((d.eval(&z) - want).abs() < 1e-4 * want.abs().max(1.0));
        }
    }

    #[test]
    fn mc_expectation_deterministic_and_gaussian() {
        let h = HurstParam::new(0.3f64).unwrap();
        let flat = BumpFactor::new(1.0, vec![0.0], 1e12, vec![0]).unwrap();
        let e = mc_simplex_expectation(&[flat.clone(), flat.clone()], h, 0.0, 1.0, 64, 8, 1).unwrap();
        assert!((e.estimate.mean - 0.5).abs() < 1e-12);

        let f = BumpFactor::new(1.0, vec![0.4], 0.5, vec![1]).unwrap();
        let e = mc_simplex_expectation(&[f.clone()], h, 0.0, 1.0, 256, 20_000, 2).unwrap();
        // ∫_0^1 E f'(B_s) ds with B_s ~ N(0, s^{2H}).
        let density = |z: f64, v: f64| (-(z * z) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        let inner = |s: f64| {
            let v = s.powf(0.6);
            adaptive_simpson(&|z| f.eval(&[z]) * density(z, v), -12.0, 12.0, 1e-12)
        };
        let oracle = adaptive_simpson(&|s| if s == 0.0 { f.eval(&[0.0]) } else { inner(s) }, 0.0, 1.0, 1e-9);
        assert!(e.estimate.z_score(oracle).abs() < 3.0, "{:?} vs {oracle}", e.estimate);

        let g = BumpFactor::new(1.0, vec![0.0], 0.8, vec![0]).unwrap();
        let a = mc_simplex_expectation(&[f.clone(), g.clone()], h, 0.0, 1.0, 128, 4000, 3).unwrap();
        let b = mc_simplex_expectation(&[f, g], h, 0.0, 1.0, 128, 8000, 4).unwrap();
        let se = (a.estimate.stderr.powi(2) + b.estimate.stderr.powi(2)).sqrt();
        assert!(a.estimate.mean.is_finite() && ((a.estimate.mean - b.estimate.mean) / se).abs() < 4.0);
    }
}
