//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

/// `∫_0^∞ g(x) dx` by the trapezoid rule in `s = ln x` on `[s_lo, s_hi]`.
/// For integrands that decay at both ends of the log axis the rule
/// converges geometrically in the step.
pub fn log_trapezoid(g: impl Fn(f64) -> f64, s_lo: f64, s_hi: f64, h: f64) -> f64 {
    let n = ((s_hi - s_lo) / h).ceil() as usize;
    let h = (s_hi - s_lo) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let s = s_lo + i as f64 * h;
        let x = s.exp();
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * g(x) * x;
    }
    sum * h
}

/// Adaptive Simpson on `[a, b]`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Sample autocorrelation at `lag` with the full-series mean and variance.
pub fn acf(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let cov: f64 = (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum();
    cov / var
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Direct `(mean x^m)^{1/m} / mean x`.
pub fn brute_moment(x: &[f64], m: f64) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| v.powf(m)).sum::<f64>() / n).powf(1.0 / m) / mean
}
