use num_rational::Rational64;
use proptest::prelude::*;

use skewflow::bound_eval::{
    first_failure_threshold, first_regime_failure, hurst_thresholds, log_series_term, main_estimate_rhs, scan_one, series_gamma_argument,
    BoundParams, Verdict,
};
use skewflow::fbm::{fbm_covariance, sample_fbm_circulant, sample_wiener, HurstParam, TimeGrid};
use skewflow::frac_calc::{rl_integral_left, rl_integral_right, FracOrder, SampledFunction};
use skewflow::girsanov::girsanov_weight;
use skewflow::kernel_ops::kh_operator;
use skewflow::shuffle_algebra::{binomial, enumerate_shuffles, partial_shuffle_expand, DerivativeLedger, MultiIndex};
use skewflow::skew_sde::{mollifier, occupation_integral};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn multi_indices(d: usize, len: usize) -> impl Strategy<Value = Vec<MultiIndex>> {
    prop::collection::vec(prop::collection::vec(0u32..4, d), len)
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn shuffle_count_and_block_order(m in 0usize..7, n in 0usize..7) {
        let set = enumerate_shuffles(m, n).unwrap();
        prop_assert_eq!(set.permutations.len() as u128, binomial(m + n, m));
        for sigma in &set.permutations {
            prop_assert!(sigma[..m].windows(2).all(|w| w[0] < w[1]));
            prop_assert!(sigma[m..].windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn ledger_total_invariant_under_partial_shuffle(
        (f, g, k) in (1usize..4, 0usize..4, 1usize..3).prop_flat_map(|(n, p, d)| {
            (multi_indices(d, n), multi_indices(d, p), 0..=n)
        })
    ) {
        let total = DerivativeLedger::new(f.clone()).concat(&DerivativeLedger::new(g.clone())).total();
        let expansion = partial_shuffle_expand(&f, &g, k).unwrap();
        prop_assert_eq!(expansion.sequences.len() as u128, binomial(f.len() - k + g.len(), g.len()));
        for seq in &expansion.sequences {
            prop_assert_eq!(seq.ledger.total(), total);
        }
    }

    #[test]
    fn ledger_additive_under_concat(f in multi_indices(2, 3), g in multi_indices(2, 2)) {
        let (a, b) = (DerivativeLedger::new(f), DerivativeLedger::new(g));
        let c = a.concat(&b);
        prop_assert_eq!(c.total(), a.total() + b.total());
        let per: Vec<u64> = a.per_coordinate().iter().zip(b.per_coordinate()).map(|(x, y)| x + y).collect();
        prop_assert_eq!(c.per_coordinate(), per);
    }

    #[test]
    fn flow_thresholds_exact_and_decreasing(d in 1usize..6, k in 1i64..6) {
        let t = hurst_thresholds(d).unwrap();
        let here = t.flow_threshold(k).unwrap();
        prop_assert_eq!(here, Rational64::new(1, 2 * (d as i64 - 1 + 2 * k)));
        prop_assert!(t.flow_threshold(k + 1).unwrap() < here);
        prop_assert!(hurst_thresholds(d + 1).unwrap().flow_threshold(k).unwrap() < here);
    }

    #[test]
    fn series_term_finite_iff_gamma_argument_positive(h in 0.01f64..0.49, d in 1usize..4, k in 1usize..4, q in 1u32..4, m in 1usize..30) {
        let arg: f64 = series_gamma_argument(h, d, k, q, m);
        let term = log_series_term(h, d, k, q, m);
        prop_assert_eq!(arg > 0.0, term.as_ref().is_ok_and(|v| v.is_finite()));
        let boundary = first_regime_failure(h, d, k);
        prop_assert_eq!(boundary == Some(1), h >= first_failure_threshold(d, k, 1));
        if let Some(m0) = boundary {
            prop_assert!(series_gamma_argument::<f64>(h, d, k, q, m0) <= 0.0);
        }
    }

    #[test]
    fn decay_below_asymptotic_threshold(frac in 0.05f64..0.8, d in 1usize..3, k in 1usize..3, q in 1u32..4) {
        let h = frac / (2.0 * (d as f64 + 2.0));
        prop_assert_eq!(scan_one(h, d, k, q, 50).unwrap().verdict, Verdict::Decay);
    }

    #[test]
    fn main_estimate_rhs_positive_and_continuous_in_gamma(h in 0.05f64..0.2, g in 0.05f64..0.9, m in 1usize..6) {
        let mut p = BoundParams::simple(h, 1, m, 0.0, 1.0);
        p.gamma = g * h;
        let a = main_estimate_rhs(&p).unwrap();
        p.gamma = g * h * (1.0 + 1e-7);
        let b = main_estimate_rhs(&p).unwrap();
        prop_assert!(a > 0.0 && a.is_finite());
        prop_assert!(((a - b) / a).abs() < 1e-5);
    }

    #[test]
    fn fbm_covariance_symmetric(h in 0.02f64..0.98, t in 0.0f64..5.0, s in 0.0f64..5.0) {
        let hp = HurstParam::new(h).unwrap();
        let a = fbm_covariance(hp, t, s).unwrap();
        prop_assert!((a - fbm_covariance(hp, s, t).unwrap()).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert!((fbm_covariance(hp, t, t).unwrap() - t.powf(2.0 * h)).abs() <= 1e-12 * (1.0 + t));
    }
}

fn smooth(coeffs: &[f64]) -> SampledFunction<f64> {
    let c = coeffs.to_vec();
    SampledFunction::from_fn(0.0, 1.0, 257, move |x: f64| c[0] * x + c[1] * (3.0 * x).sin() + c[2] * x * x).unwrap()
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn rl_integrals_linear_and_positive(
        alpha in 0.05f64..1.0,
        c1 in -3.0f64..3.0,
        c2 in -3.0f64..3.0,
        u in prop::collection::vec(-2.0f64..2.0, 3),
        v in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let o = FracOrder::new(alpha).unwrap();
        let (f, g) = (smooth(&u), smooth(&v));
        let combo = f.combine(c1, &g, c2).unwrap();
        for op in [rl_integral_left::<f64>, rl_integral_right::<f64>] {
            let lhs = op(&combo, o);
            let rhs = op(&f, o).combine(c1, &op(&g, o), c2).unwrap();
            let scale = 1.0 + lhs.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (a, b) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
        let nonneg = f.map_with_x(|_, y| y.abs());
        prop_assert!(rl_integral_left(&nonneg, o).values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn kh_operator_linear(h in 0.1f64..0.45, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let hp = HurstParam::new(h).unwrap();
        let f = SampledFunction::from_fn(0.0, 1.0, 129, |x: f64| x * x).unwrap();
        let g = SampledFunction::from_fn(0.0, 1.0, 129, |x: f64| (2.0 * x).sin()).unwrap();
        let lhs = kh_operator(hp, &f.combine(c1, &g, c2).unwrap()).unwrap();
        let rhs = kh_operator(hp, &f).unwrap().combine(c1, &kh_operator(hp, &g).unwrap(), c2).unwrap();
        for (a, b) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn girsanov_weight_positive(h in 0.05f64..0.5, amp in -3.0f64..3.0, seed in 0u64..1000) {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let w = sample_wiener(grid, 1, 16, seed).unwrap();
        let u = vec![SampledFunction::from_fn(0.0, 1.0, 65, |s: f64| amp * (1.0 + s)).unwrap()];
        let xi = girsanov_weight(HurstParam::new(h).unwrap(), &u, &w).unwrap();
        prop_assert!(xi.iter().all(|&x| x > 0.0 && x.is_finite()));
    }

    #[test]
    fn mollifier_concentrates(y in 0.2f64..2.0, d in 1usize..4) {
        let point = vec![y; d];
        let origin = vec![0.0; d];
        let r2 = y * y * d as f64;
        let mut prev = f64::INFINITY;
        for j in 0..8 {
            let eps = r2 / (d as f64) * 0.5f64.powi(j + 1);
            let v = mollifier(&point, eps).unwrap();
            prop_assert!(v < prev);
            prev = v;
            let ratio = mollifier(&origin, eps).unwrap() * eps.powf(d as f64 / 2.0);
            prop_assert!((ratio - (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn occupation_nondecreasing_in_time(seed in 0u64..500, eps in 0.01f64..1.0) {
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let b = sample_fbm_circulant(HurstParam::new(0.3).unwrap(), grid, 1, 4, seed).unwrap();
        for p in 0..4 {
            let path = b.path(p);
            let mut prev = 0.0;
            for to in 0..=128 {
                let v = occupation_integral(path, 1, grid.dt(), &[0.0], eps, 0, to);
                prop_assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn sampler_deterministic(seed in 0u64..10_000, h in 0.05f64..0.95) {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let hp = HurstParam::new(h).unwrap();
        let a = sample_fbm_circulant(hp, grid, 2, 8, seed).unwrap();
        let b = sample_fbm_circulant(hp, grid, 2, 8, seed).unwrap();
        prop_assert_eq!(a.data(), b.data());
    }
}
