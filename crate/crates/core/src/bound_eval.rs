//! Right-hand side of the iterated-integral moment estimate, the series
//! terms of the higher-order derivative bound, summability scans and exact
//! Hurst thresholds.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::frac_calc::ln_gamma_fn;
use crate::scalar::Scalar;
use crate::shuffle_algebra::{DerivativeLedger, MultiIndex};

/// Inputs of the moment estimate for `E ∫_{Δ^m_{θ,t}} Π_j D^{α_j} f_j(s_j, B_{s_j}) ϰ_j(s_j) ds`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundParams<T> {
    pub h: T,
    pub d: usize,
    /// One multi-index per factor; `m` is its length.
    pub alpha: Vec<MultiIndex>,
    /// `ε_j ∈ {0, 1}`: whether factor `j` carries `K_H(s, θ)`.
    pub eps_flags: Vec<bool>,
    pub gamma: T,
    pub theta: T,
    pub t: T,
    /// `‖f_j‖_{L¹(ℝ^d; L^∞)}` per factor.
    pub f_norms: Vec<T>,
    /// The unspecified universal constant.
    pub c: T,
}

impl<T: Scalar> BoundParams<T> {
    /// Zero multi-indices, no kernel weights, unit norms, `γ = h/100`, `C = 1`.
    pub fn simple(h: T, d: usize, m: usize, theta: T, t: T) -> Self {
        Self {
            h,
            d,
            alpha: vec![vec![0; d]; m],
            eps_flags: vec![false; m],
            gamma: h / T::of(100.0),
            theta,
            t,
            f_norms: vec![T::one(); m],
            c: T::one(),
        }
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn ledger(&self) -> DerivativeLedger {
        DerivativeLedger::new(self.alpha.clone())
    }

    /// `|α|`.
    pub fn alpha_total(&self) -> u64 {
        self.ledger().total()
    }

    pub fn eps_count(&self) -> usize {
        self.eps_flags.iter().filter(|&&e| e).count()
    }

    /// `−H(2md + 4|α|) + 2(H − ½ − γ)Σε_j + 2m`.
    pub fn gamma_argument(&self) -> T {
        let m = T::of_usize(self.m());
        let d = T::of_usize(self.d);
        let a = T::of(self.alpha_total() as f64);
        let e = T::of_usize(self.eps_count());
        -self.h * (T::of(2.0) * m * d + T::of(4.0) * a) + T::of(2.0) * (self.h - T::of(0.5) - self.gamma) * e + T::of(2.0) * m
    }

    /// `−H(md + 2|α|) − (H − ½ − γ)Σε_j + m`.
    pub fn time_exponent(&self) -> T {
        let m = T::of_usize(self.m());
        let d = T::of_usize(self.d);
        let a = T::of(self.alpha_total() as f64);
        let e = T::of_usize(self.eps_count());
        -self.h * (m * d + T::of(2.0) * a) - (self.h - T::of(0.5) - self.gamma) * e + m
    }

    fn check_shape(&self) -> Result<()> {
        let m = self.m();
        if self.eps_flags.len() != m || self.f_norms.len() != m {
            return Err(domain("α, ε and norm lists must all have length m"));
        }
        if self.alpha.iter().any(|a| a.len() != self.d) {
            return Err(domain(format!("every multi-index must have d = {} entries", self.d)));
        }
        if !(self.theta >= T::zero() && self.theta < self.t) {
            return Err(domain("need 0 ≤ θ < t"));
        }
        if self.f_norms.iter().any(|&n| !(n >= T::zero())) || !(self.c > T::zero()) {
            return Err(domain("norms must be non-negative and C positive"));
        }
        Ok(())
    }

    /// The hypotheses `0 < γ < H` and `H < (½ − γ)/(d − 1 + 2|α_j|)` for every `j`.
    pub fn check_hypotheses(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma < self.h) {
            return Err(Error::Regime(format!("need 0 < γ < H, got γ = {}, H = {}", self.gamma, self.h)));
        }
        for (j, a) in self.alpha.iter().enumerate() {
            let denom = self.d as f64 - 1.0 + 2.0 * a.iter().map(|&x| x as f64).sum::<f64>();
            if denom <= 0.0 {
                continue;
            }
            let bound = (T::of(0.5) - self.gamma) / T::of(denom);
            if !(self.h < bound) {
                return Err(Error::Regime(format!(
                    "factor {j}: H = {} is not below (1/2 − γ)/(d − 1 + 2|α_j|) = {bound}",
                    self.h
                )));
            }
        }
        Ok(())
    }
}

/// Logarithm of the right-hand side, `C` included.
pub fn main_estimate_log_rhs<T: Scalar>(p: &BoundParams<T>) -> Result<T> {
    p.check_shape()?;
    let arg = p.gamma_argument();
    if !(arg > T::zero()) {
        return Err(Error::Regime(format!(
            "Gamma argument −H(2md+4|α|) + 2(H−1/2−γ)Σε + 2m = {arg} is not positive"
        )));
    }
    let mut log = T::of((p.m() as u64 + p.alpha_total()) as f64) * p.c.ln();
    for &n in &p.f_norms {
        log = log + n.ln();
    }
    let e = p.eps_count();
    if e > 0 {
        if p.theta == T::zero() {
            return Err(domain("θ = 0 with a kernel-weighted factor makes θ^{(H−1/2)Σε} infinite"));
        }
        log = log + (p.h - T::of(0.5)) * T::of_usize(e) * p.theta.ln();
    }
    for s in p.ledger().per_coordinate() {
        log = log + T::of(0.25) * ln_gamma_fn(T::of(2.0 * s as f64 + 1.0))?;
    }
    log = log + p.time_exponent() * (p.t - p.theta).ln();
    Ok(log - T::of(0.5) * ln_gamma_fn(arg)?)
}

pub fn main_estimate_rhs<T: Scalar>(p: &BoundParams<T>) -> Result<T> {
    Ok(main_estimate_log_rhs(p)?.exp())
}

/// Gamma argument of the `m`-th series term,
/// `−H(2d·2^q m + 4·2^q(m+k−1)) + 2·2^q m`.
pub fn series_gamma_argument<T: Scalar>(h: T, d: usize, k: usize, q: u32, m: usize) -> T {
    let s = T::of(2f64.powi(q as i32));
    let m_t = T::of_usize(m);
    let a = s * T::of_usize(m + k - 1);
    -h * (T::of(2.0 * d as f64) * s * m_t + T::of(4.0) * a) + T::of(2.0) * s * m_t
}

fn check_series_inputs(d: usize, k: usize, m: usize) -> Result<()> {
    if d == 0 || k == 0 || m == 0 {
        return Err(domain("d, k and m must all be at least 1"));
    }
    Ok(())
}

/// `ln` of `((2·2^q(m+k−1))!^{1/4} / Γ(arg)^{1/2})^{1/2^q}`.
pub fn log_series_term<T: Scalar>(h: T, d: usize, k: usize, q: u32, m: usize) -> Result<T> {
    check_series_inputs(d, k, m)?;
    let arg = series_gamma_argument(h, d, k, q, m);
    if !(arg > T::zero()) {
        return Err(Error::Regime(format!(
            "series term m = {m}: Gamma argument {arg} is not positive (needs H < {})",
            first_failure_threshold(d, k, m)
        )));
    }
    let s = 2f64.powi(q as i32);
    let fact = ln_gamma_fn(T::of(2.0 * s * (m + k - 1) as f64 + 1.0))?;
    Ok((T::of(0.25) * fact - T::of(0.5) * ln_gamma_fn(arg)?) / T::of(s))
}

pub fn series_term<T: Scalar>(h: T, d: usize, k: usize, q: u32, m: usize) -> Result<T> {
    Ok(log_series_term(h, d, k, q, m)?.exp())
}

/// `H` below which the Gamma argument of term `m` is positive:
/// `m / (m(d+2) + 2(k−1))`, independent of `q`.
pub fn first_failure_threshold(d: usize, k: usize, m: usize) -> f64 {
    m as f64 / (m as f64 * (d as f64 + 2.0) + 2.0 * (k as f64 - 1.0))
}

/// Smallest `m ≥ 1` whose Gamma argument is non-positive, in closed form.
///
/// The argument is `2^q(m(2 − 2H(d+2)) − 4H(k−1))`, linear in `m`. When the
/// slope is positive a failure can only occur for small `m`, so it happens
/// at `m = 1` or not at all; when the slope is non-positive it already
/// fails at `m = 1`.
pub fn first_regime_failure(h: f64, d: usize, k: usize) -> Option<usize> {
    let slope = 2.0 - 2.0 * h * (d as f64 + 2.0);
    let offset = 4.0 * h * (k as f64 - 1.0);
    if slope - offset <= 0.0 {
        Some(1)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Decay,
    Growth,
    RegimeFailure,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub h: f64,
    pub verdict: Verdict,
    /// First `m` with a non-positive Gamma argument.
    pub failure_m: Option<usize>,
    /// `T_{m_max} / T_{m_max − 1}`.
    pub tail_ratio: Option<f64>,
    pub analytic_threshold: f64,
}

/// Verdict for one `h`: regime failure if some term up to `m_max` has a
/// non-positive Gamma argument; decay if the log-terms decrease over the
/// last quarter of `1..=m_max` and the final ratio is below 1; growth
/// otherwise.
pub fn scan_one(h: f64, d: usize, k: usize, q: u32, m_max: usize) -> Result<ScanRow> {
    let analytic_threshold = 1.0 / (2.0 * (d as f64 - 1.0 + 2.0 * k as f64));
    let mut logs = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        match log_series_term(h, d, k, q, m) {
            Ok(v) => logs.push(v),
            Err(Error::Regime(_)) => {
                return Ok(ScanRow { h, verdict: Verdict::RegimeFailure, failure_m: Some(m), tail_ratio: None, analytic_threshold })
            }
            Err(e) => return Err(e),
        }
    }
    let tail_start = (3 * m_max / 4).max(1);
    let decreasing = logs[tail_start - 1..].windows(2).all(|w| w[1] < w[0]);
    let tail_ratio = (logs[m_max - 1] - logs[m_max - 2]).exp();
    let verdict = if decreasing && tail_ratio < 1.0 { Verdict::Decay } else { Verdict::Growth };
    Ok(ScanRow { h, verdict, failure_m: None, tail_ratio: Some(tail_ratio), analytic_threshold })
}

pub fn summability_scan(d: usize, k: usize, q: u32, h_grid: &[f64], m_max: usize) -> Result<Vec<ScanRow>> {
    if m_max < 20 {
        return Err(domain(format!("summability scan needs m_max ≥ 20, got {m_max}")));
    }
    check_series_inputs(d, k, 1)?;
    if h_grid.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(domain("every h must lie in (0, 1)"));
    }
    h_grid.iter().map(|&h| scan_one(h, d, k, q, m_max)).collect()
}

/// Location of the first change away from `Decay` on an increasing grid:
/// the midpoint between the last decaying `h` and its successor.
pub fn observed_flip(rows: &[ScanRow]) -> Option<f64> {
    rows.windows(2)
        .find(|w| w[0].verdict == Verdict::Decay && w[1].verdict != Verdict::Decay)
        .map(|w| 0.5 * (w[0].h + w[1].h))
}

/// Named Hurst thresholds in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdTable {
    pub d: i64,
    /// `1/(2(1+d))`, exponential moments of the local-time functional.
    pub exp_moment: Rational64,
    /// `1/(2(d+2))`, existence and uniqueness of strong solutions.
    pub existence: Rational64,
    /// `1/(2(d+3))`, Lipschitz flows.
    pub cg_flow: Rational64,
    /// `(k, 1/(2(d−1+2k)))` for `k = 1..=6`, Sobolev differentiability of order `k`.
    pub flow: Vec<(i64, Rational64)>,
}

impl ThresholdTable {
    pub fn flow_threshold(&self, k: i64) -> Option<Rational64> {
        self.flow.iter().find(|(kk, _)| *kk == k).map(|(_, r)| *r)
    }

    /// `(name, value)` rows in display order.
    pub fn rows(&self) -> Vec<(String, Rational64)> {
        let mut rows = vec![
            ("exp-moment".to_string(), self.exp_moment),
            ("existence".to_string(), self.existence),
            ("cg-flow".to_string(), self.cg_flow),
        ];
        rows.extend(self.flow.iter().map(|(k, r)| (format!("flow-k{k}"), *r)));
        rows
    }
}

pub fn hurst_thresholds(d: usize) -> Result<ThresholdTable> {
    if d == 0 {
        return Err(domain("dimension must be at least 1"));
    }
    let d = d as i64;
    let inv = |den: i64| Rational64::new(1, den);
    Ok(ThresholdTable {
        d,
        exp_moment: inv(2 * (1 + d)),
        existence: inv(2 * (d + 2)),
        cg_flow: inv(2 * (d + 3)),
        flow: (1..=6).map(|k| (k, inv(2 * (d - 1 + 2 * k)))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_calc::gamma_fn;

    #[test]
    fn rhs_example() {
        let p = BoundParams::simple(0.1f64, 1, 1, 0.0, 1.0);
        let v = main_estimate_rhs(&p).unwrap();
        let want = 1.0 / gamma_fn(1.8f64).unwrap().sqrt();
        assert!((v - want).abs() < 1e-13);
        assert!((p.time_exponent() - 0.9).abs() < 1e-15);

        let mut q = BoundParams::simple(0.1f64, 1, 1, 0.25, 2.0);
        let v = main_estimate_rhs(&q).unwrap();
        let want = 1.75f64.powf(0.9) / gamma_fn(1.8f64).unwrap().sqrt();
        assert!((v - want).abs() < 1e-12 * want);
        q.theta = 0.7;
        assert!((main_estimate_rhs(&q).unwrap() - 1.3f64.powf(0.9) / gamma_fn(1.8f64).unwrap().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rhs_norm_scaling_and_kernel_factor() {
        let mut p = BoundParams::simple(0.05f64, 2, 3, 0.2, 1.0);
        p.alpha = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        p.eps_flags = vec![true, false, true];
        p.f_norms = vec![1.5, 0.8, 2.0];
        p.c = 1.7;
        let full = main_estimate_rhs(&p).unwrap();
        for n in &mut p.f_norms {
            *n *= 0.5;
        }
        let halved = main_estimate_rhs(&p).unwrap();
        assert!((halved / full - 0.125).abs() < 1e-12);
        p.theta = 0.0;
        assert!(main_estimate_rhs(&p).is_err());
        p.eps_flags = vec![false; 3];
        let a = main_estimate_rhs(&p).unwrap();
        p.theta = 1e-8;
        p.t = 1.0 + 1e-8;
        let b = main_estimate_rhs(&p).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn rhs_regime_and_hypotheses() {
        let mut p = BoundParams::simple(0.1f64, 1, 2, 0.0, 1.0);
        assert!(p.check_hypotheses().is_ok());
        p.gamma = 0.2;
        assert!(matches!(p.check_hypotheses(), Err(Error::Regime(_))));
        let mut p = BoundParams::simple(0.1f64, 1, 1, 0.0, 1.0);
        p.alpha = vec![vec![3]];
        assert!(p.check_hypotheses().is_err());
        p.h = 0.9;
        assert!(matches!(main_estimate_rhs(&p), Err(Error::Regime(_))));
    }

    #[test]
    fn rhs_vanishes_at_gamma_pole() {
        // m = 1, d = 1, |α| = 1: argument 2 − 6H. Since Γ(x) ~ 1/x, the RHS
        // behaves like √(2 − 6H) as the argument approaches 0⁺.
        let mut p = BoundParams::simple(0.1f64, 1, 1, 0.0, 1.0);
        p.alpha = vec![vec![1]];
        let mut prev = f64::INFINITY;
        for j in 1..12 {
            p.h = (1.0 - 10f64.powi(-j)) / 3.0;
            p.gamma = p.h / 100.0;
            let arg = p.gamma_argument();
            assert!(arg > 0.0);
            let v = main_estimate_rhs(&p).unwrap();
            assert!(v < prev);
            prev = v;
            if j > 4 {
                let scaled = v / arg.sqrt();
                assert!((scaled - 2f64.sqrt().powf(0.5)).abs() < 1e-3, "{scaled}");
            }
        }
    }

    #[test]
    fn rhs_continuous_in_gamma() {
        let mut p = BoundParams::simple(0.08f64, 1, 2, 0.3, 1.0);
        p.eps_flags = vec![true, true];
        let mut last: Option<f64> = None;
        for i in 1..100 {
            p.gamma = 0.08 * i as f64 / 100.0;
            let v = main_estimate_rhs(&p).unwrap();
            if let Some(l) = last {
                assert!(((v - l) / l).abs() < 0.02);
            }
            last = Some(v);
        }
    }

    #[test]
    fn series_log_matches_direct() {
        for (h, d, k, q) in [(0.1, 1, 1, 1u32), (0.05, 2, 2, 1), (0.12, 1, 2, 2)] {
            for m in 1..=3usize {
                let s = 2f64.powi(q as i32);
                let n = (2.0 * s * (m + k - 1) as f64) as u64;
                let fact: f64 = (1..=n).map(|i| i as f64).product();
                let arg = series_gamma_argument::<f64>(h, d, k, q, m);
                let direct = (fact.powf(0.25) / gamma_fn::<f64>(arg).unwrap().sqrt()).powf(1.0 / s);
                let v = series_term(h, d, k, q, m).unwrap();
                assert!(v > 0.0);
                assert!(((v - direct) / direct).abs() < 1e-10, "{v} vs {direct}");
            }
        }
    }

    #[test]
    fn regime_failure_closed_form() {
        for d in 1..=3 {
            for k in 1..=3 {
                for i in 1..100 {
                    let h = i as f64 / 100.0;
                    let brute = (1..=200).find(|&m| series_gamma_argument(h, d, k, 1, m) <= 0.0);
                    assert_eq!(first_regime_failure(h, d, k), brute, "h={h} d={d} k={k}");
                    assert_eq!(log_series_term(h, d, k, 1, 1).is_err(), brute.is_some());
                }
            }
        }
    }

    #[test]
    fn thresholds_d1() {
        let t = hurst_thresholds(1).unwrap();
        let r = Rational64::new;
        assert_eq!(t.exp_moment, r(1, 4));
        assert_eq!(t.existence, r(1, 6));
        assert_eq!(t.cg_flow, r(1, 8));
        assert_eq!(t.flow_threshold(1), Some(r(1, 4)));
        assert_eq!(t.flow_threshold(2), Some(r(1, 8)));
        assert_eq!(t.flow_threshold(3), Some(r(1, 12)));
        for d in 1..=6usize {
            let t = hurst_thresholds(d).unwrap();
            assert_eq!(t.flow_threshold(2), Some(t.cg_flow));
            assert!(t.flow.windows(2).all(|w| w[1].1 < w[0].1));
            let next = hurst_thresholds(d + 1).unwrap();
            assert!(next.existence < t.existence && next.flow_threshold(1) < t.flow_threshold(1));
        }
        assert_eq!(hurst_thresholds(2).unwrap().flow_threshold(1), Some(r(1, 6)));
        assert_eq!(hurst_thresholds(2).unwrap().flow_threshold(2), Some(r(1, 10)));
    }

    #[test]
    fn scan_decays_well_inside() {
        let grid = [0.02, 0.05, 0.08];
        for (d, k) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            for q in 1..=3 {
                let rows = summability_scan(d, k, q, &grid, 50).unwrap();
                assert!(rows.iter().all(|r| r.verdict == Verdict::Decay), "d={d} k={k} q={q}");
            }
            let out = summability_scan(d, k, 1, &[0.45, 0.6], 50).unwrap();
            for q in 2..=3 {
                let other = summability_scan(d, k, q, &[0.45, 0.6], 50).unwrap();
                for (a, b) in out.iter().zip(&other) {
                    assert_eq!(a.verdict, b.verdict);
                    assert_ne!(a.verdict, Verdict::Decay);
                }
            }
        }
        assert!(summability_scan(1, 1, 1, &grid, 10).is_err());
    }
}
