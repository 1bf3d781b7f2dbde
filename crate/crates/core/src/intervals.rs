//! Return intervals between threshold exceedances and their moments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("threshold q = {0} must be finite and positive")]
    InvalidThreshold(f64),
    #[error("volatility series is empty")]
    EmptySeries,
    #[error("interval series is empty")]
    EmptyIntervals,
    #[error("moment order m = {0} must be finite and nonzero")]
    InvalidOrder(f64),
    #[error("moment of order {0} overflowed")]
    Overflow(f64),
    #[error("sweep targets must be positive and sorted ascending")]
    InvalidTargets,
    #[error("series contains non-finite values")]
    NonFinite,
}

/// Waiting times between successive values strictly above `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSeries {
    pub q: f64,
    pub taus: Vec<u64>,
    /// Arithmetic mean of `taus`, absent when there are no intervals.
    pub mean_tau: Option<f64>,
    pub n_exceedances: usize,
    /// Index of the first exceedance; the stretch before it is discarded.
    pub first_exceedance: Option<usize>,
}

impl IntervalSeries {
    pub fn from_taus(q: f64, taus: Vec<u64>) -> Self {
        let mean_tau = mean_of(&taus);
        let n_exceedances = if taus.is_empty() { 0 } else { taus.len() + 1 };
        Self { q, taus, mean_tau, n_exceedances, first_exceedance: None }
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }
}

fn mean_of(taus: &[u64]) -> Option<f64> {
    if taus.is_empty() {
        None
    } else {
        Some(taus.iter().sum::<u64>() as f64 / taus.len() as f64)
    }
}

/// Exceedances are global indices `i` with `v[i] > q`; intervals are their
/// successive differences, so day boundaries are crossed freely. Fewer than
/// two exceedances yields an empty series rather than an error.
pub fn extract_intervals(v: &[f64], q: f64) -> Result<IntervalSeries, IntervalError> {
    if !q.is_finite() || q <= 0.0 {
        return Err(IntervalError::InvalidThreshold(q));
    }
    if v.is_empty() {
        return Err(IntervalError::EmptySeries);
    }
    Ok(extract_unchecked(v, q))
}

fn extract_unchecked(v: &[f64], q: f64) -> IntervalSeries {
    let mut taus = Vec::new();
    let mut first = None;
    let mut last: Option<usize> = None;
    let mut n = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > q {
            n += 1;
            match last {
                Some(prev) => taus.push((i - prev) as u64),
                None => first = Some(i),
            }
            last = Some(i);
        }
    }
    IntervalSeries { q, mean_tau: mean_of(&taus), taus, n_exceedances: n, first_exceedance: first }
}

/// `(count, first, last)` of exceedances without materializing intervals.
fn exceedance_stats(v: &[f64], q: f64) -> (usize, usize, usize) {
    let mut count = 0;
    let (mut first, mut last) = (0, 0);
    for (i, &x) in v.iter().enumerate() {
        if x > q {
            if count == 0 {
                first = i;
            }
            last = i;
            count += 1;
        }
    }
    (count, first, last)
}

/// `τ / ⟨τ⟩` for every interval.
pub fn scaled_intervals(s: &IntervalSeries) -> Result<Vec<f64>, IntervalError> {
    let mean = s.mean_tau.ok_or(IntervalError::EmptyIntervals)?;
    Ok(s.taus.iter().map(|&t| t as f64 / mean).collect())
}

/// `μ_m = ⟨(τ/⟨τ⟩)^m⟩^{1/m}`.
pub fn moment(s: &IntervalSeries, m: f64) -> Result<f64, IntervalError> {
    if s.is_empty() {
        return Err(IntervalError::EmptyIntervals);
    }
    let taus: Vec<f64> = s.taus.iter().map(|&t| t as f64).collect();
    sample_moment(&taus, m)
}

/// Scaled moment of arbitrary positive samples, evaluated as
/// `(mean x^m)^{1/m} / mean x`, which is exactly 1 at `m = 1`.
pub fn sample_moment(xs: &[f64], m: f64) -> Result<f64, IntervalError> {
    if xs.is_empty() {
        return Err(IntervalError::EmptyIntervals);
    }
    if !m.is_finite() || m == 0.0 {
        return Err(IntervalError::InvalidOrder(m));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let power_mean = |scale: f64| -> f64 {
        let s: f64 = match m {
            1.0 => xs.iter().map(|x| x / scale).sum(),
            2.0 => xs.iter().map(|x| (x / scale) * (x / scale)).sum(),
            0.5 => xs.iter().map(|x| (x / scale).sqrt()).sum(),
            _ => xs.iter().map(|x| (x / scale).powf(m)).sum(),
        };
        (s / n).powf(1.0 / m)
    };
    let direct = power_mean(1.0) / mean;
    if direct.is_finite() && direct > 0.0 {
        return Ok(direct);
    }
    let scaled = power_mean(mean);
    if scaled.is_finite() && scaled > 0.0 {
        Ok(scaled)
    } else {
        Err(IntervalError::Overflow(m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Entries with fewer exceedances are dropped.
    pub min_exceedances: usize,
    /// Stop bisecting once the achieved ⟨τ⟩ is this close (relative).
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { min_exceedances: 50, rel_tol: 0.02, max_iter: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub target: f64,
    pub series: IntervalSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepWarning {
    pub target: f64,
    pub reason: String,
}

/// Interval series at thresholds chosen to hit target mean intervals,
/// ordered by increasing `q`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThresholdSweep {
    pub entries: Vec<SweepEntry>,
    pub warnings: Vec<SweepWarning>,
}

impl ThresholdSweep {
    pub fn mean_taus(&self) -> Vec<f64> {
        self.entries.iter().filter_map(|e| e.series.mean_tau).collect()
    }
}

/// Bisects `q` on `[0, max(v)]` for each target ⟨τ⟩. The reported ⟨τ⟩ is
/// the one actually achieved; unreachable targets become warnings.
pub fn sweep_thresholds(
    v: &[f64],
    targets: &[f64],
    cfg: &SweepConfig,
) -> Result<ThresholdSweep, IntervalError> {
    if v.is_empty() {
        return Err(IntervalError::EmptySeries);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(IntervalError::NonFinite);
    }
    if targets.iter().any(|t| !(t.is_finite() && *t > 0.0)) || targets.windows(2).any(|w| w[0] > w[1]) {
        return Err(IntervalError::InvalidTargets);
    }
    let max_v = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_exceedances = cfg.min_exceedances.max(2);
    let mut sweep = ThresholdSweep::default();

    for &target in targets {
        if target < 1.0 {
            sweep.warnings.push(SweepWarning { target, reason: "target below 1".into() });
            continue;
        }
        let evaluate = |q: f64| -> Option<f64> {
            let (count, first, last) = exceedance_stats(v, q);
            (count >= min_exceedances).then(|| (last - first) as f64 / (count - 1) as f64)
        };
        let mut best: Option<(f64, f64)> = None;
        let consider = |best: &mut Option<(f64, f64)>, q: f64, mean: f64| {
            let err = (mean - target).abs() / target;
            if best.is_none_or(|(_, b)| err < (b - target).abs() / target) {
                *best = Some((q, mean));
            }
        };

        let (mut lo, mut hi) = (0.0, max_v.max(0.0));
        match evaluate(lo) {
            None => {
                sweep.warnings.push(SweepWarning {
                    target,
                    reason: format!("fewer than {min_exceedances} exceedances at q = 0"),
                });
                continue;
            }
            Some(mean) => consider(&mut best, lo, mean),
        }
        for _ in 0..cfg.max_iter {
            if let Some((_, mean)) = best {
                if (mean - target).abs() <= cfg.rel_tol * target {
                    break;
                }
            }
            let mid = 0.5 * (lo + hi);
            match evaluate(mid) {
                Some(mean) => {
                    consider(&mut best, mid, mean);
                    if mean < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                None => hi = mid,
            }
        }
        let (q, _) = best.expect("q = 0 was evaluated");
        let achieved = extract_unchecked(v, q);
        if achieved.mean_tau.is_some_and(|m| (m - target).abs() > cfg.rel_tol * target) {
            let mean = achieved.mean_tau.unwrap_or(f64::NAN);
            if evaluate(hi).is_none() && mean < target {
                sweep.warnings.push(SweepWarning {
                    target,
                    reason: format!(
                        "not achievable with {min_exceedances} exceedances (closest mean {mean:.3})"
                    ),
                });
                continue;
            }
        }
        sweep.entries.push(SweepEntry { target, series: achieved });
    }
    sweep.entries.sort_by(|a, b| a.series.q.total_cmp(&b.series.q));
    Ok(sweep)
}
