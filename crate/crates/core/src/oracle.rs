//! Reference integrators for unit tests, written independently of the
//! production quadrature (adaptive Simpson after singularity-removing
//! substitutions).

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Γ by the reflection-free Stirling series with upward recurrence.
pub fn gamma(x: f64) -> f64 {
    let mut shift = 1.0;
    let mut z = x;
    while z < 20.0 {
        shift *= z;
        z += 1.0;
    }
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3)) + 1.0 / (1260.0 * z.powi(5))
        - 1.0 / (1680.0 * z.powi(7));
    ((z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series).exp() / shift
}

/// `I^α_{a+} p (x)` via `u = (x−y)^α`.
pub fn rl_left(p: &dyn Fn(f64) -> f64, a: f64, x: f64, alpha: f64) -> f64 {
    let g = |u: f64| p(x - u.powf(1.0 / alpha));
    adaptive_simpson(&g, 0.0, (x - a).powf(alpha), 1e-13) / (alpha * gamma(alpha))
}

/// `I^α_{b−} p (x)` via `u = (y−x)^α`.
pub fn rl_right(p: &dyn Fn(f64) -> f64, x: f64, b: f64, alpha: f64) -> f64 {
    let g = |u: f64| p(x + u.powf(1.0 / alpha));
    adaptive_simpson(&g, 0.0, (b - x).powf(alpha), 1e-13) / (alpha * gamma(alpha))
}
