//! Empirical survival functions of scaled intervals and the threshold trend
//! of their (non-)collapse.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stretchedexp::log_space;

/// Number of log-spaced grid points used by [`collapse_deviation`].
pub const COLLAPSE_GRID_POINTS: usize = 50;
/// Threshold count up to which trend p-values are exact permutation values.
const EXACT_PERMUTATION_MAX: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("empty sample")]
    Empty,
    #[error("scaled intervals must be finite and positive")]
    InvalidSample,
    #[error("need at least 2 distributions, got {0}")]
    TooFewDistributions(usize),
    #[error("thresholds must be distinct")]
    DuplicateThreshold,
    #[error("supports of the distributions do not overlap")]
    EmptyOverlap,
}

/// Right-continuous empirical survival `D(x) = #{x_i ≥ x} / n` at every
/// distinct sample value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub xs: Vec<f64>,
    pub survival: Vec<f64>,
    pub q: f64,
    pub n: usize,
}

pub fn empirical_survival(scaled: &[f64], q: f64) -> Result<EmpiricalCdf, DistError> {
    if scaled.is_empty() {
        return Err(DistError::Empty);
    }
    if scaled.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(DistError::InvalidSample);
    }
    let mut sorted = scaled.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut xs = Vec::new();
    let mut survival = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if i == 0 || sorted[i - 1] != x {
            xs.push(x);
            survival.push((n - i) as f64 / n as f64);
        }
    }
    Ok(EmpiricalCdf { xs, survival, q, n })
}

impl EmpiricalCdf {
    /// Step-function value `#{x_i ≥ x} / n`.
    pub fn at(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&v| v < x);
        self.survival.get(k).copied().unwrap_or(0.0)
    }

    /// Linear interpolation in `ln x` between the sample points; clamps to
    /// the end values outside the support.
    pub fn interpolate(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            return self.survival[0];
        }
        if x >= self.xs[last] {
            return self.survival[last];
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        let (x0, x1) = (self.xs[k].ln(), self.xs[k + 1].ln());
        let w = (x.ln() - x0) / (x1 - x0);
        self.survival[k] * (1.0 - w) + self.survival[k + 1] * w
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

/// How `D(x)` moves with `q` at one grid abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub x: f64,
    /// Kendall τ-b between thresholds and `D(x)`.
    pub trend: f64,
    /// Two-sided p-value of `trend` under random assignment.
    pub p_value: f64,
    /// Least-squares slope of `D(x)` against `q`.
    pub slope: f64,
    /// `max D(x) - min D(x)` across thresholds.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub thresholds: Vec<f64>,
    pub points: Vec<CollapsePoint>,
    /// Mean Kendall trend over grid points with `x < 1`.
    pub trend_below_one: f64,
    pub trend_above_one: f64,
    pub sign_below_one: i8,
    pub sign_above_one: i8,
    pub mean_abs_slope: f64,
    pub max_spread: f64,
}

/// Compares survival curves from several thresholds on a shared log grid.
/// A collapse onto one scaling curve gives no trend with `q`.
pub fn collapse_deviation(cdfs: &[EmpiricalCdf]) -> Result<CollapseReport, DistError> {
    if cdfs.len() < 2 {
        return Err(DistError::TooFewDistributions(cdfs.len()));
    }
    let thresholds: Vec<f64> = cdfs.iter().map(|c| c.q).collect();
    for i in 0..thresholds.len() {
        for j in 0..i {
            if thresholds[i] == thresholds[j] {
                return Err(DistError::DuplicateThreshold);
            }
        }
    }
    let lo = cdfs.iter().map(|c| c.support().0).fold(f64::NEG_INFINITY, f64::max);
    let hi = cdfs.iter().map(|c| c.support().1).fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        return Err(DistError::EmptyOverlap);
    }

    let points: Vec<CollapsePoint> = log_space(lo, hi, COLLAPSE_GRID_POINTS)
        .into_iter()
        .map(|x| {
            let d: Vec<f64> = cdfs.iter().map(|c| c.interpolate(x)).collect();
            let trend = kendall_tau_b(&thresholds, &d);
            let spread = d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - d.iter().copied().fold(f64::INFINITY, f64::min);
            CollapsePoint {
                x,
                trend,
                p_value: kendall_p_value(&thresholds, &d, trend),
                slope: ols_slope(&thresholds, &d),
                spread,
            }
        })
        .collect();

    let mean_trend = |keep: &dyn Fn(f64) -> bool| {
        let sel: Vec<f64> = points.iter().filter(|p| keep(p.x)).map(|p| p.trend).collect();
        if sel.is_empty() {
            0.0
        } else {
            sel.iter().sum::<f64>() / sel.len() as f64
        }
    };
    let trend_below_one = mean_trend(&|x| x < 1.0);
    let trend_above_one = mean_trend(&|x| x > 1.0);
    Ok(CollapseReport {
        thresholds,
        trend_below_one,
        trend_above_one,
        sign_below_one: sign(trend_below_one),
        sign_above_one: sign(trend_above_one),
        mean_abs_slope: points.iter().map(|p| p.slope.abs()).sum::<f64>() / points.len() as f64,
        max_spread: points.iter().map(|p| p.spread).fold(0.0, f64::max),
        points,
    })
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Kendall τ-b; zero when either variable is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (x[i] - x[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal) as i64;
            let dy = (y[i] - y[j]).partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal) as i64;
            if dx == 0 {
                ties_x += 1;
            }
            if dy == 0 {
                ties_y += 1;
            }
            match dx * dy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let pairs = (n * (n.saturating_sub(1)) / 2) as i64;
    let denom = (((pairs - ties_x) * (pairs - ties_y)) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (concordant - discordant) as f64 / denom
    }
}

fn kendall_p_value(x: &[f64], y: &[f64], observed: f64) -> f64 {
    let k = x.len();
    if observed == 0.0 {
        return 1.0;
    }
    if k <= EXACT_PERMUTATION_MAX {
        let mut perm: Vec<usize> = (0..k).collect();
        let (mut extreme, mut total) = (0usize, 0usize);
        let mut permuted = vec![0.0; k];
        for_each_permutation(&mut perm, 0, &mut |p| {
            for (slot, &src) in permuted.iter_mut().zip(p) {
                *slot = y[src];
            }
            total += 1;
            if kendall_tau_b(x, &permuted).abs() >= observed.abs() - 1e-12 {
                extreme += 1;
            }
        });
        extreme as f64 / total as f64
    } else {
        let n = k as f64;
        let z = 3.0 * observed * (n * (n - 1.0)).sqrt() / (2.0 * (2.0 * n + 5.0)).sqrt();
        2.0 * (1.0 - normal_cdf(z.abs()))
    }
}

fn for_each_permutation(p: &mut [usize], start: usize, f: &mut dyn FnMut(&[usize])) {
    if start == p.len() {
        f(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        for_each_permutation(p, start + 1, f);
        p.swap(start, i);
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
