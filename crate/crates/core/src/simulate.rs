//! Monte-Carlo experiments on i.i.d. stretched-exponential intervals.
//!
//! Two experiments are provided: the discreteness experiment samples
//! intervals at a fixed count and coarsens them to a time grid before
//! measuring moments; the finite-size experiment fixes the record length
//! instead, so a target `⟨τ⟩` leaves `size / ⟨τ⟩` intervals, and reports
//! the average multiscaling exponent per size and order.
//!
//! Realizations run on the rayon pool and are reduced in index order, so
//! results depend only on the plan and its seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiscaling::{fit_alpha, mean_std, CurveSource, MomentCurve};
use crate::seed::{derive_seed, EXPERIMENT_DISCRETENESS, EXPERIMENT_FINITE_SIZE};
use crate::stretchedexp::{params_from_gamma, StretchedExpError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error(transparent)]
    Params(#[from] StretchedExpError),
    #[error("mean interval must be finite and positive, got {0}")]
    InvalidMeanTau(f64),
    #[error("interval count must be at least 1")]
    EmptySample,
    #[error("resolution must be finite and positive, got {0}")]
    InvalidResolution(f64),
    #[error("invalid plan: {}", .0.join("; "))]
    InvalidPlan(Vec<String>),
}

/// Target grid `10^{k/12}` for `k = 6..=36`: 31 points from about 3.16 to
/// 1000, twelve of them inside `(10, 100]`.
pub fn default_targets() -> Vec<f64> {
    (6..=36).map(|k| 10f64.powf(k as f64 / 12.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationPlan {
    pub gamma: f64,
    /// Intervals per trial (discreteness) or record length (finite size).
    pub sizes: Vec<usize>,
    /// Time grid spacings; `0` is the continuous (undiscretized) case.
    #[serde(default = "continuous_only")]
    pub resolutions: Vec<f64>,
    pub n_realizations: usize,
    #[serde(default = "default_targets")]
    pub target_mean_taus: Vec<f64>,
    pub m_values: Vec<f64>,
    #[serde(default)]
    pub rng_seed: u64,
}

fn continuous_only() -> Vec<f64> {
    vec![0.0]
}

impl SimulationPlan {
    /// γ = 0.3, 200 000 intervals per trial, 100 trials, resolutions
    /// continuous, 1, 5 and 10.
    pub fn discreteness_default() -> Self {
        Self {
            gamma: 0.3,
            sizes: vec![200_000],
            resolutions: vec![0.0, 1.0, 5.0, 10.0],
            n_realizations: 100,
            target_mean_taus: default_targets(),
            m_values: vec![0.5, 2.0],
            rng_seed: 0,
        }
    }

    /// γ = 0.3, record lengths 2·10⁴, 2·10⁵, 2·10⁶, 500 realizations.
    pub fn finite_size_default() -> Self {
        Self {
            gamma: 0.3,
            sizes: vec![20_000, 200_000, 2_000_000],
            resolutions: vec![0.0],
            n_realizations: 500,
            target_mean_taus: default_targets(),
            m_values: vec![0.1, 0.25, 0.5, 0.75, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        let mut errors = Vec::new();
        if !(self.gamma.is_finite() && self.gamma > 0.0 && self.gamma <= 2.0) {
            errors.push(format!("gamma: {} is outside (0, 2]", self.gamma));
        }
        if self.sizes.is_empty() {
            errors.push("sizes: must not be empty".into());
        }
        if self.sizes.contains(&0) {
            errors.push("sizes: entries must be positive".into());
        }
        if self.resolutions.is_empty() {
            errors.push("resolutions: must not be empty".into());
        }
        if self.resolutions.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            errors.push("resolutions: entries must be positive (0 = continuous)".into());
        }
        if self.n_realizations == 0 {
            errors.push("n_realizations: must be positive".into());
        }
        if self.target_mean_taus.is_empty() {
            errors.push("target_mean_taus: must not be empty".into());
        }
        if self.target_mean_taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            errors.push("target_mean_taus: entries must be positive".into());
        }
        if self.m_values.is_empty() {
            errors.push("m_values: must not be empty".into());
        }
        if self.m_values.iter().any(|m| !m.is_finite() || *m == 0.0 || *m <= -1.0) {
            errors.push("m_values: orders must be finite, nonzero and > -1".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(SimulateError::InvalidPlan(errors))
        }
    }
}

/// `n` i.i.d. stretched-exponential intervals with population mean
/// `mean_tau`.
pub fn simulate_intervals(gamma: f64, mean_tau: f64, n: usize, seed: u64) -> Result<Vec<f64>, SimulateError> {
    if !(mean_tau.is_finite() && mean_tau > 0.0) {
        return Err(SimulateError::InvalidMeanTau(mean_tau));
    }
    if n == 0 {
        return Err(SimulateError::EmptySample);
    }
    let params = params_from_gamma(gamma)?;
    let mut taus = params.sample(n, seed);
    for t in &mut taus {
        *t *= mean_tau;
    }
    Ok(taus)
}

/// Maps every interval to the end of its sampling window,
/// `resolution·⌈τ/resolution⌉`.
pub fn discretize(taus: &[f64], resolution: f64) -> Result<Vec<f64>, SimulateError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(SimulateError::InvalidResolution(resolution));
    }
    Ok(taus.iter().map(|&t| snap_up(t, resolution)).collect())
}

#[inline]
fn snap_up(t: f64, r: f64) -> f64 {
    let mut k = (t / r).ceil().max(1.0);
    if k > 1.0 && (k - 1.0) * r >= t {
        k -= 1.0;
    }
    if k * r < t {
        k += 1.0;
    }
    k * r
}

/// Single-pass `μ_m` for several orders at once, using the sample's own
/// mean as `⟨τ⟩`.
#[derive(Debug, Clone)]
pub(crate) struct MomentAccumulator<'a> {
    orders: &'a [f64],
    power_sums: Vec<f64>,
    sum: f64,
    n: usize,
}

impl<'a> MomentAccumulator<'a> {
    pub(crate) fn new(orders: &'a [f64]) -> Self {
        Self { orders, power_sums: vec![0.0; orders.len()], sum: 0.0, n: 0 }
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.sum += x;
        self.n += 1;
        for (acc, &m) in self.power_sums.iter_mut().zip(self.orders) {
            *acc += match m {
                0.5 => x.sqrt(),
                1.0 => x,
                2.0 => x * x,
                _ => x.powf(m),
            };
        }
    }

    pub(crate) fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub(crate) fn moments(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mean = self.mean();
        self.power_sums.iter().zip(self.orders).map(|(s, &m)| (s / n).powf(1.0 / m) / mean).collect()
    }
}

/// Averaged moment curve for one `(size, resolution, m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretenessCurve {
    pub size: usize,
    /// `0` for the continuous case.
    pub resolution: f64,
    pub targets: Vec<f64>,
    pub curve: MomentCurve,
    /// Standard error of each averaged `μ_m` across realizations.
    pub mu_stderr: Vec<f64>,
}

impl DiscretenessCurve {
    pub fn m(&self) -> f64 {
        self.curve.m
    }
}

/// For every size, target and realization, draws one continuous sample and
/// evaluates every resolution on it (common random numbers), then averages
/// `μ_m` and the achieved `⟨τ⟩` over realizations.
pub fn run_discreteness_experiment(plan: &SimulationPlan) -> Result<Vec<DiscretenessCurve>, SimulateError> {
    plan.validate()?;
    let params = params_from_gamma(plan.gamma)?;
    let n_targets = plan.target_mean_taus.len();
    let mut curves = Vec::new();

    for &size in &plan.sizes {
        // (target, realization) -> per resolution: (achieved mean, μ per m)
        let tasks: Vec<Vec<(f64, Vec<f64>)>> = (0..n_targets * plan.n_realizations)
            .into_par_iter()
            .map(|task| {
                let (t_idx, real) = (task / plan.n_realizations, task % plan.n_realizations);
                let target = plan.target_mean_taus[t_idx];
                let seed = derive_seed(
                    plan.rng_seed,
                    &[EXPERIMENT_DISCRETENESS, size as u64, real as u64, t_idx as u64],
                );
                let mut base = params.sample(size, seed);
                for x in &mut base {
                    *x *= target;
                }
                plan.resolutions
                    .iter()
                    .map(|&res| {
                        let mut acc = MomentAccumulator::new(&plan.m_values);
                        if res > 0.0 {
                            base.iter().for_each(|&x| acc.push(snap_up(x, res)));
                        } else {
                            base.iter().for_each(|&x| acc.push(x));
                        }
                        (acc.mean(), acc.moments())
                    })
                    .collect()
            })
            .collect();

        for (r_idx, &res) in plan.resolutions.iter().enumerate() {
            for (m_idx, &m) in plan.m_values.iter().enumerate() {
                let mut points = Vec::with_capacity(n_targets);
                let mut stderr = Vec::with_capacity(n_targets);
                for t_idx in 0..n_targets {
                    let runs = &tasks[t_idx * plan.n_realizations..(t_idx + 1) * plan.n_realizations];
                    let taus: Vec<f64> = runs.iter().map(|r| r[r_idx].0).collect();
                    let mus: Vec<f64> = runs.iter().map(|r| r[r_idx].1[m_idx]).collect();
                    let (mean_mu, sd_mu) = mean_std(&mus);
                    points.push((mean_std(&taus).0, mean_mu));
                    stderr.push(sd_mu / (mus.len() as f64).sqrt());
                }
                // Points stay in target order; achieved means are increasing.
                curves.push(DiscretenessCurve {
                    size,
                    resolution: res,
                    targets: plan.target_mean_taus.clone(),
                    curve: MomentCurve { m, points, source: CurveSource::Simulation },
                    mu_stderr: stderr,
                });
            }
        }
    }
    Ok(curves)
}

/// Average multiscaling exponent for one `(size, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeRow {
    pub size: usize,
    pub m: f64,
    /// `⟨α⟩` fitted over the medium range.
    pub mean_alpha: f64,
    pub std_alpha: f64,
    /// `⟨α⟩` fitted over every target of the plan.
    pub mean_alpha_full: f64,
    pub n_fits: usize,
}

/// Continuous intervals at every target with `size / ⟨τ⟩` intervals each;
/// `α` is fitted per realization over `fit_range` and over the full target
/// range, then averaged per `(size, m)`.
pub fn run_finite_size_experiment(
    plan: &SimulationPlan,
    fit_range: (f64, f64),
) -> Result<Vec<FiniteSizeRow>, SimulateError> {
    plan.validate()?;
    let params = params_from_gamma(plan.gamma)?;
    let full_range = (0.0, f64::MAX);
    let mut rows = Vec::new();

    for &size in &plan.sizes {
        // realization -> per m: (alpha in range, alpha full range)
        let fits: Vec<Vec<(Option<f64>, Option<f64>)>> = (0..plan.n_realizations)
            .into_par_iter()
            .map(|real| {
                let mut per_m: Vec<Vec<(f64, f64)>> = vec![Vec::new(); plan.m_values.len()];
                for (t_idx, &target) in plan.target_mean_taus.iter().enumerate() {
                    let n = (size as f64 / target).floor() as usize;
                    if n < 2 {
                        continue;
                    }
                    let seed = derive_seed(
                        plan.rng_seed,
                        &[EXPERIMENT_FINITE_SIZE, size as u64, real as u64, t_idx as u64],
                    );
                    let dist = params.distribution();
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut acc = MomentAccumulator::new(&plan.m_values);
                    for _ in 0..n {
                        acc.push(dist.sample(&mut rng) * target);
                    }
                    let mean = acc.mean();
                    for (curve, mu) in per_m.iter_mut().zip(acc.moments()) {
                        curve.push((mean, mu));
                    }
                }
                plan.m_values
                    .iter()
                    .zip(per_m)
                    .map(|(&m, points)| {
                        let curve = MomentCurve::new(m, points, CurveSource::Simulation);
                        (
                            fit_alpha(&curve, fit_range.0, fit_range.1).ok().map(|e| e.alpha),
                            fit_alpha(&curve, full_range.0, full_range.1).ok().map(|e| e.alpha),
                        )
                    })
                    .collect()
            })
            .collect();

        for (m_idx, &m) in plan.m_values.iter().enumerate() {
            let in_range: Vec<f64> = fits.iter().filter_map(|f| f[m_idx].0).collect();
            let full: Vec<f64> = fits.iter().filter_map(|f| f[m_idx].1).collect();
            let (mean_alpha, std_alpha) = mean_std(&in_range);
            rows.push(FiniteSizeRow {
                size,
                m,
                mean_alpha,
                std_alpha,
                mean_alpha_full: mean_std(&full).0,
                n_fits: in_range.len(),
            });
        }
    }
    Ok(rows)
}
