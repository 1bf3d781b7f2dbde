//! Power-law fits `μ_m ~ ⟨τ⟩^α` and their aggregation across instruments.
//!
//! Under a single scaling function every moment is independent of `⟨τ⟩`,
//! so `α ≈ 0`; a systematic, order-dependent `α` indicates multiscaling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default medium range `(10, 100]` for `α` fits, in minutes.
pub const DEFAULT_FIT_RANGE: (f64, f64) = (10.0, 100.0);
/// Default histogram bin width for `α`.
pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiscalingError {
    #[error("need at least 3 points in ({low}, {high}], found {found}")]
    TooFewPoints { low: f64, high: f64, found: usize },
    #[error("invalid fit range ({0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("no estimates given")]
    Empty,
    #[error("estimates mix orders {0} and {1}")]
    MixedOrders(f64, f64),
    #[error("bin width must be positive")]
    InvalidBinWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSource {
    Original,
    Surrogate,
    Simulation,
}

/// `(⟨τ⟩, μ_m)` pairs for one order, sorted by `⟨τ⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub m: f64,
    pub points: Vec<(f64, f64)>,
    pub source: CurveSource,
}

impl MomentCurve {
    /// Sorts by `⟨τ⟩` and drops points that are not finite and positive.
    pub fn new(m: f64, mut points: Vec<(f64, f64)>, source: CurveSource) -> Self {
        points.retain(|&(t, mu)| t.is_finite() && t > 0.0 && mu.is_finite() && mu > 0.0);
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { m, points, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub m: f64,
    pub alpha: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub n_points: usize,
    pub fit_range: (f64, f64),
}

impl AlphaEstimate {
    /// `|α| > 2·stderr`.
    pub fn is_significant(&self) -> bool {
        self.alpha.abs() > 2.0 * self.stderr
    }
}

/// Ordinary least squares of `ln μ_m` on `ln ⟨τ⟩` over points with
/// `low < ⟨τ⟩ ≤ high`.
pub fn fit_alpha(curve: &MomentCurve, low: f64, high: f64) -> Result<AlphaEstimate, MultiscalingError> {
    if !(low.is_finite() && high.is_finite() && low >= 0.0 && low < high) {
        return Err(MultiscalingError::InvalidRange(low, high));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .points
        .iter()
        .filter(|&&(t, _)| t > low && t <= high)
        .map(|&(t, mu)| (t.ln(), mu.ln()))
        .unzip();
    let n = xs.len();
    if n < 3 {
        return Err(MultiscalingError::TooFewPoints { low, high, found: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(MultiscalingError::TooFewPoints { low, high, found: 1 });
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(AlphaEstimate { m: curve.m, alpha, stderr, intercept, n_points: n, fit_range: (low, high) })
}

/// Mean and spread of `α` over instruments for one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEnsemble {
    pub m: f64,
    pub members: Vec<AlphaEstimate>,
    pub mean_alpha: f64,
    pub std_alpha: f64,
}

impl AlphaEnsemble {
    pub fn from_estimates(members: Vec<AlphaEstimate>) -> Result<Self, MultiscalingError> {
        let m = check_same_order(&members)?;
        let alphas: Vec<f64> = members.iter().map(|e| e.alpha).collect();
        let (mean_alpha, std_alpha) = mean_std(&alphas);
        Ok(Self { m, members, mean_alpha, std_alpha })
    }
}

fn check_same_order(estimates: &[AlphaEstimate]) -> Result<f64, MultiscalingError> {
    let first = estimates.first().ok_or(MultiscalingError::Empty)?.m;
    if let Some(other) = estimates.iter().find(|e| e.m != first) {
        return Err(MultiscalingError::MixedOrders(first, other.m));
    }
    Ok(first)
}

/// Mean and sample (N-1) standard deviation; the deviation of a single
/// value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaHistogram {
    pub m: f64,
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    pub mean: f64,
    pub std: f64,
}

/// Counts `α` in bins `[k·w, (k+1)·w)` spanning the occupied range.
pub fn alpha_histogram(estimates: &[AlphaEstimate], bin_width: f64) -> Result<AlphaHistogram, MultiscalingError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(MultiscalingError::InvalidBinWidth);
    }
    let m = check_same_order(estimates)?;
    let alphas: Vec<f64> = estimates.iter().map(|e| e.alpha).collect();
    let index = |a: f64| (a / bin_width).floor() as i64;
    let lo = alphas.iter().map(|&a| index(a)).min().unwrap_or(0);
    let hi = alphas.iter().map(|&a| index(a)).max().unwrap_or(0);
    let mut bins: Vec<HistogramBin> = (lo..=hi)
        .map(|k| HistogramBin { left: k as f64 * bin_width, right: (k + 1) as f64 * bin_width, count: 0 })
        .collect();
    for &a in &alphas {
        bins[(index(a) - lo) as usize].count += 1;
    }
    let (mean, std) = mean_std(&alphas);
    Ok(AlphaHistogram { m, bin_width, bins, mean, std })
}

/// One row of the `⟨α⟩` versus `m` relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub m: f64,
    pub mean_alpha: f64,
    pub std_alpha: f64,
    pub n_curves: usize,
    /// Curves whose fit failed (too few points in range).
    pub n_failed: usize,
}

/// Fits every curve in range and averages `α` per order, sorted by `m`.
pub fn alpha_vs_m(curves: &[MomentCurve], low: f64, high: f64) -> Vec<AlphaSummary> {
    let mut orders: Vec<f64> = Vec::new();
    for c in curves {
        if !orders.contains(&c.m) {
            orders.push(c.m);
        }
    }
    orders.sort_by(f64::total_cmp);
    orders
        .into_iter()
        .filter_map(|m| {
            let group: Vec<&MomentCurve> = curves.iter().filter(|c| c.m == m).collect();
            let fits: Vec<f64> = group.iter().filter_map(|c| fit_alpha(c, low, high).ok()).map(|e| e.alpha).collect();
            if fits.is_empty() {
                return None;
            }
            let (mean_alpha, std_alpha) = mean_std(&fits);
            Some(AlphaSummary { m, mean_alpha, std_alpha, n_curves: fits.len(), n_failed: group.len() - fits.len() })
        })
        .collect()
}
